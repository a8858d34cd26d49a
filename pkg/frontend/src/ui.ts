/** DOM rendering for the wizard.
 *
 * The annotated page is shown in a sandboxed iframe (no scripts run);
 * selection happens through badge chips generated from the analysis and
 * segmentation responses, mirroring the marks the server injected into
 * the preview.
 */

import { WizardApiError } from "./api";
import { callTranscript, exportCliSequence } from "./export";
import { WizardError, WizardMachine } from "./state";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export class WizardView {
  private status: HTMLElement;
  private panel: HTMLElement;
  private preview: HTMLIFrameElement;

  constructor(private readonly machine: WizardMachine, root: HTMLElement) {
    root.innerHTML = "";
    this.status = el("div", "wizard-status");
    this.panel = el("div", "wizard-panel");
    this.preview = document.createElement("iframe");
    this.preview.className = "wizard-preview";
    this.preview.setAttribute("sandbox", "");  // display only, no scripts
    root.append(this.status, this.panel, this.preview);
    this.render();
  }

  private async act(action: () => void | Promise<void>): Promise<void> {
    try {
      await action();
      this.setError("");
    } catch (err) {
      if (err instanceof WizardError) {
        this.setError(err.message);
      } else if (err instanceof WizardApiError) {
        this.setError(`${err.body.code}: ${err.body.message} (retry is safe)`);
      } else {
        this.setError(String(err));
      }
    }
    this.render();
  }

  private setError(message: string): void {
    this.status.dataset.error = message;
  }

  private showPreview(html: string | undefined): void {
    this.preview.srcdoc = html ?? "";
  }

  render(): void {
    const m = this.machine;
    this.panel.innerHTML = "";
    const error = this.status.dataset.error ?? "";
    this.status.textContent = error ? `step: ${m.step} — ${error}` : `step: ${m.step}`;
    this.status.classList.toggle("has-error", Boolean(error));

    switch (m.step) {
      case "source":
        this.renderSource();
        break;
      case "form-select":
        this.renderFormSelect();
        break;
      case "value-entry":
        this.renderValueEntry();
        break;
      case "block-select":
        this.renderBlockSelect();
        break;
      case "field-config":
        this.renderFieldConfig();
        break;
      case "review":
        this.renderReview();
        break;
      case "done":
        this.renderDone();
        break;
    }
    if (m.step !== "source" && m.step !== "done") {
      const back = el("button", "back", "back");
      back.onclick = () => this.act(() => m.back());
      this.panel.append(back);
    }
  }

  private renderSource(): void {
    const url = el("input") as HTMLInputElement;
    url.placeholder = "page address (http://...)";
    const go = el("button", "", "analyze");
    go.onclick = () => this.act(async () => {
      await this.machine.loadSource({ url: url.value.trim() });
      this.showPreview(this.machine.analyzeResponse?.annotated_html);
    });
    this.panel.append(url, go);
  }

  private renderFormSelect(): void {
    const m = this.machine;
    this.showPreview(m.analyzeResponse?.annotated_html);
    if (m.forms.length === 0) {
      this.panel.append(el("p", "", "no query forms found; this is a static page"));
    }
    m.forms.forEach((form, fi) => {
      const box = el("div", fi === m.formIndex ? "form chosen" : "form");
      box.append(el("h3", "", `form ${fi + 1}${form.synthetic ? " (assembled)" : ""}`));
      const fields = el("div", "chips");
      for (const field of form.input_list) {
        if (field.fillable) {
          fields.append(el("span", "chip", `${field.ui_mark} ${field.description}`));
        }
      }
      box.append(fields);
      const buttons = el("div", "chips");
      form.query_button_list.forEach((btn, bi) => {
        const chip = el("button", "chip",
          `${btn.ui_mark} ${btn.label || btn.source_kind}`);
        chip.onclick = () => this.act(() => {
          m.selectForm(fi);
          m.selectButton(bi);
        });
        if (fi === m.formIndex && bi === m.buttonIndex) {
          chip.classList.add("chosen");
        }
        buttons.append(chip);
      });
      box.append(buttons);
      box.onclick = () => this.act(() => m.selectForm(fi));
      this.panel.append(box);
    });
    const next = el("button", "", "fill this form");
    next.onclick = () => this.act(() => m.confirmForm());
    const skip = el("button", "", "skip form");
    skip.onclick = () => this.act(async () => {
      await m.skipForm();
      this.showPreview(m.segmentResponse?.annotated_html);
    });
    this.panel.append(next, skip);
  }

  private renderValueEntry(): void {
    const m = this.machine;
    const form = m.forms[m.formIndex as number];
    for (const field of form.input_list) {
      if (!field.fillable || !field.name) {
        continue;
      }
      const row = el("label", "value-row", `${field.ui_mark} ${field.description}: `);
      const input = el("input") as HTMLInputElement;
      input.value = m.exampleValues[field.name] ?? "";
      input.onchange = () => this.act(() => m.setExampleValue(field.name, input.value));
      row.append(input);
      this.panel.append(row);
    }
    const go = el("button", "", "submit form and segment");
    go.onclick = () => this.act(async () => {
      await m.submitValues();
      this.showPreview(m.segmentResponse?.annotated_html);
    });
    this.panel.append(go);
  }

  private renderBlockSelect(): void {
    const m = this.machine;
    this.showPreview(m.segmentResponse?.annotated_html);
    if (m.blockEntries.length === 0) {
      this.panel.append(el("p", "", "no blocks found on this page"));
    }
    m.blockEntries.forEach((entry, i) => {
      const taken = m.chosenBlocks.some((c) => c.entry === entry);
      const box = el("div", taken ? "block chosen" : "block");
      const label = `block ${entry.rank}: ${entry.block.metrics.sub_block_count} items, ` +
        `${entry.block.metrics.word_count} words${entry.fallback ? " (fallback)" : ""}`;
      box.append(el("h3", "", label));
      const names = entry.field_names.map((fn) => fn.name).join(", ");
      box.append(el("p", "fields", names || "no extractable fields"));
      const add = el("button", "", taken ? "added" : "add section");
      add.disabled = taken || entry.rules === null;
      add.onclick = () => this.act(() => m.addSection(i));
      box.append(add);
      this.panel.append(box);
    });
    const next = el("button", "", "configure fields");
    next.onclick = () => this.act(() => m.toFieldConfig());
    this.panel.append(next);
  }

  private renderFieldConfig(): void {
    const m = this.machine;
    m.chosenBlocks.forEach((choice, bi) => {
      const box = el("div", "block");
      const nameInput = el("input") as HTMLInputElement;
      nameInput.value = choice.name;
      nameInput.onchange = () => this.act(() => m.renameBlock(bi, nameInput.value));
      box.append(el("span", "", "section name: "), nameInput);
      for (const fn of choice.fieldNames) {
        const row = el("label", "value-row", `field ${fn.field_id} (${fn.provenance}): `);
        const input = el("input") as HTMLInputElement;
        input.value = fn.name;
        input.onchange = () => this.act(() => m.renameField(bi, fn.field_id, input.value));
        row.append(input);
        box.append(row);
      }
      this.panel.append(box);
    });
    const name = el("input") as HTMLInputElement;
    name.placeholder = "service name";
    name.value = m.serviceName;
    const description = el("input") as HTMLInputElement;
    description.placeholder = "description";
    description.value = m.serviceDescription;
    const go = el("button", "", "review");
    go.onclick = () => this.act(() => m.toReview(name.value, description.value));
    this.panel.append(name, description, go);
  }

  private renderReview(): void {
    const m = this.machine;
    const pre = el("pre", "draft");
    pre.textContent = JSON.stringify(m.buildDraft(), null, 2);
    const submit = el("button", "", "submit");
    submit.onclick = () => this.act(async () => {
      await m.submit();
    });
    this.panel.append(pre, submit);
  }

  private renderDone(): void {
    const m = this.machine;
    const summary = m.summary;
    if (!summary) {
      return;
    }
    this.panel.append(el("h3", "", "service created"));
    this.panel.append(el("p", "", `address: ${summary.apiUrl}`));
    this.panel.append(el("p", "", `key: ${summary.apiKey}`));
    const sample = el("input") as HTMLInputElement;
    sample.value = summary.sampleInvocation;
    sample.readOnly = true;
    this.panel.append(el("p", "", "sample invocation (copy):"), sample);

    const exported = exportCliSequence(m);
    const log = el("pre", "export");
    log.textContent = [
      "# equivalent CLI sequence",
      ...exported.commands,
      "",
      `# ${exported.draftFile}`,
      JSON.stringify(exported.draft, null, 2),
      "",
      "# http transcript",
      callTranscript(m),
    ].join("\n");
    this.panel.append(log);
  }
}
