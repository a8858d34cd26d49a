/** Wizard state machine.
 *
 * Owns the step sequence (source, form-select, value-entry, block-select,
 * field-config, review, done), the choices made at each step, and draft
 * assembly. Pure with respect to the DOM: rendering lives elsewhere, and
 * all engine work happens server-side through the ApiClient.
 *
 * Steps only advance when the current step's required choices are
 * present; going back never discards entered data.
 */

import { ApiClient } from "./api";
import type {
  AnalyzeResponse, CreateResponse, FieldNameJson, FormRecordJson,
  SegmentEntry, SegmentResponse, ServiceBlockDraft, ServiceDraft, SourceSpec,
} from "./types";

export type WizardStep =
  | "source"
  | "form-select"
  | "value-entry"
  | "block-select"
  | "field-config"
  | "review"
  | "done";

export interface BlockChoice {
  entry: SegmentEntry;
  name: string;
  fieldNames: FieldNameJson[];
}

export interface ServiceSummary {
  id: number;
  apiUrl: string;
  apiKey: string;
  sampleInvocation: string;
}

export class WizardError extends Error {}

const STEP_ORDER: WizardStep[] = [
  "source", "form-select", "value-entry", "block-select",
  "field-config", "review", "done",
];

export class WizardMachine {
  step: WizardStep = "source";

  source: SourceSpec | null = null;
  analyzeResponse: AnalyzeResponse | null = null;
  formIndex: number | null = null;
  buttonIndex: number | null = null;
  exampleValues: Record<string, string> = {};
  skippedForm = false;

  segmentResponse: SegmentResponse | null = null;
  chosenBlocks: BlockChoice[] = [];

  serviceName = "";
  serviceDescription = "";
  summary: ServiceSummary | null = null;

  constructor(readonly api: ApiClient) {}

  private require(condition: boolean, message: string): void {
    if (!condition) {
      throw new WizardError(message);
    }
  }

  /** Analyze the source page and move to form selection. */
  async loadSource(source: SourceSpec): Promise<void> {
    this.require(this.step === "source", "source already loaded");
    this.require(Boolean(source.url || source.html), "enter a page address or html");
    this.analyzeResponse = await this.api.analyze(source);
    this.source = source;
    this.step = "form-select";
  }

  get forms(): FormRecordJson[] {
    return this.analyzeResponse?.analysis.forms ?? [];
  }

  selectForm(index: number): void {
    this.require(this.step === "form-select", "not at form selection");
    this.require(index >= 0 && index < this.forms.length, "no such form");
    this.formIndex = index;
    if (this.buttonIndex !== null &&
        this.buttonIndex >= this.forms[index].query_button_list.length) {
      this.buttonIndex = null;
    }
  }

  selectButton(index: number): void {
    this.require(this.step === "form-select", "not at form selection");
    this.require(this.formIndex !== null, "pick a form first");
    const buttons = this.forms[this.formIndex as number].query_button_list;
    this.require(index >= 0 && index < buttons.length, "no such query button");
    this.buttonIndex = index;
  }

  /** Confirm form and button and move to example-value entry. */
  confirmForm(): void {
    this.require(this.step === "form-select", "not at form selection");
    this.require(this.formIndex !== null, "pick a form (or skip the form step)");
    this.require(this.buttonIndex !== null, "pick the query button");
    this.skippedForm = false;
    this.step = "value-entry";
  }

  /** Static-page path: no form to fill; segment the page directly. */
  async skipForm(): Promise<void> {
    this.require(this.step === "form-select", "not at form selection");
    this.require(this.source !== null, "no source loaded");
    this.skippedForm = true;
    this.formIndex = null;
    this.buttonIndex = null;
    this.segmentResponse = await this.api.segment({ source: this.source as SourceSpec });
    this.step = "block-select";
  }

  setExampleValue(fieldName: string, value: string): void {
    this.require(this.step === "value-entry", "not at value entry");
    this.exampleValues[fieldName] = value;
  }

  /** Submit the form with the entered example values and segment the result. */
  async submitValues(): Promise<void> {
    this.require(this.step === "value-entry", "not at value entry");
    this.require(this.source !== null, "no source loaded");
    this.segmentResponse = await this.api.segment({
      source: this.source as SourceSpec,
      form_choice: this.formIndex as number,
      button_choice: this.buttonIndex as number,
      field_values: this.exampleValues,
    });
    this.step = "block-select";
  }

  get blockEntries(): SegmentEntry[] {
    return this.segmentResponse?.blocks ?? [];
  }

  /** The "add section" action: accumulate a block selection. */
  addSection(entryIndex: number, name?: string): void {
    this.require(this.step === "block-select", "not at block selection");
    const entries = this.blockEntries;
    this.require(entryIndex >= 0 && entryIndex < entries.length, "no such block");
    const entry = entries[entryIndex];
    this.require(entry.rules !== null, "block has no extractable data");
    this.require(!this.chosenBlocks.some((c) => c.entry === entry), "block already added");
    const defaultName = `block_${entry.rank}`;
    this.chosenBlocks.push({
      entry,
      name: name ?? defaultName,
      fieldNames: entry.field_names.map((fn) => ({ ...fn })),
    });
  }

  removeSection(index: number): void {
    this.require(this.step === "block-select", "not at block selection");
    this.require(index >= 0 && index < this.chosenBlocks.length, "no such section");
    this.chosenBlocks.splice(index, 1);
  }

  toFieldConfig(): void {
    this.require(this.step === "block-select", "not at block selection");
    this.require(this.chosenBlocks.length > 0, "add at least one block");
    this.step = "field-config";
  }

  renameBlock(blockIndex: number, name: string): void {
    this.require(this.step === "field-config", "not at field configuration");
    this.require(name.trim().length > 0, "block name cannot be empty");
    this.chosenBlocks[blockIndex].name = name.trim();
  }

  renameField(blockIndex: number, fieldId: number, name: string): void {
    this.require(this.step === "field-config", "not at field configuration");
    this.require(name.trim().length > 0, "field name cannot be empty");
    const block = this.chosenBlocks[blockIndex];
    const entry = block.fieldNames.find((fn) => fn.field_id === fieldId);
    this.require(entry !== undefined, "no such field");
    (entry as FieldNameJson).name = name.trim();
  }

  toReview(name: string, description: string): void {
    this.require(this.step === "field-config", "not at field configuration");
    this.require(name.trim().length > 0, "service name required");
    this.serviceName = name.trim();
    this.serviceDescription = description;
    this.step = "review";
  }

  /** The definition draft the review screen shows and submit() sends. */
  buildDraft(): ServiceDraft {
    this.require(this.chosenBlocks.length > 0, "cannot build a service with zero blocks");
    const analysis = this.analyzeResponse?.analysis;
    const blocks: ServiceBlockDraft[] = this.chosenBlocks.map((choice) => ({
      name: choice.name,
      block: choice.entry.block,
      rules: choice.entry.rules!,
      field_names: choice.fieldNames,
    }));
    const draft: ServiceDraft = {
      name: this.serviceName,
      description: this.serviceDescription,
      source_url: analysis?.url || this.source?.url || "",
      blocks,
    };
    if (!this.skippedForm && this.formIndex !== null && analysis) {
      const taggedAnalysis = JSON.parse(JSON.stringify(analysis));
      taggedAnalysis.main_form_index = this.formIndex;
      taggedAnalysis.forms[this.formIndex].main_btn_index = this.buttonIndex;
      draft.form_analysis = taggedAnalysis;
      const bindings: Record<string, string> = {};
      const examples: Record<string, string> = {};
      const form = analysis.forms[this.formIndex];
      for (const [fieldName, value] of Object.entries(this.exampleValues)) {
        const field = form.input_list.find((f) => f.name === fieldName);
        if (field) {
          bindings[fieldName] = field.css_selector;
          examples[fieldName] = value;
        }
      }
      draft.field_bindings = bindings;
      draft.example_values = examples;
    }
    return draft;
  }

  /** Create the service; resolves to the done step with the summary. */
  async submit(): Promise<ServiceSummary> {
    this.require(this.step === "review", "not at review");
    this.require(this.chosenBlocks.length > 0, "cannot submit with zero blocks");
    const created: CreateResponse = await this.api.createService(this.buildDraft());
    const params = new URLSearchParams({ key: created.api_key });
    for (const param of Object.keys(this.exampleValues)) {
      params.set(param, this.exampleValues[param]);
    }
    this.summary = {
      id: created.id,
      apiUrl: created.api_url,
      apiKey: created.api_key,
      sampleInvocation: `${created.api_url}?${params.toString()}`,
    };
    this.step = "done";
    return this.summary;
  }

  /** Step back without losing anything already entered. */
  back(): void {
    const position = STEP_ORDER.indexOf(this.step);
    this.require(position > 0 && this.step !== "done", "cannot go back from here");
    let previous = STEP_ORDER[position - 1];
    if (this.step === "block-select" && this.skippedForm) {
      previous = "form-select";
    }
    this.step = previous;
  }
}
