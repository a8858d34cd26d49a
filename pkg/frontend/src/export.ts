/** Export a finished wizard run as the equivalent CLI sequence.
 *
 * Every generation done through the wizard is reproducible without it:
 * the exported commands drive the same engine through its CLI, with the
 * service draft written to a JSON file.
 */

import { WizardMachine } from "./state";
import type { ServiceDraft } from "./types";

export interface CliExport {
  commands: string[];
  draftFile: string;
  draft: ServiceDraft;
}

function shellQuote(value: string): string {
  return /^[A-Za-z0-9_@%+=:,./-]+$/.test(value) ? value : `'${value.replace(/'/g, "'\\''")}'`;
}

export function exportCliSequence(machine: WizardMachine,
                                  draftFile = "service_draft.json"): CliExport {
  const source = machine.source;
  if (!source) {
    throw new Error("nothing to export: no source was loaded");
  }
  const sourceArg = source.url ?? "page.html";
  const commands: string[] = [];
  commands.push(`webwrap analyze ${shellQuote(sourceArg)}`);

  const segmentParts = ["webwrap", "segment", shellQuote(sourceArg)];
  if (!machine.skippedForm && machine.formIndex !== null) {
    segmentParts.push("--form", String(machine.formIndex));
    if (machine.buttonIndex !== null) {
      segmentParts.push("--button", String(machine.buttonIndex));
    }
    for (const [field, value] of Object.entries(machine.exampleValues)) {
      segmentParts.push("--values", shellQuote(`${field}=${value}`));
    }
  }
  commands.push(segmentParts.join(" "));
  commands.push(`webwrap create ${shellQuote(draftFile)}`);

  return { commands, draftFile, draft: machine.buildDraft() };
}

/** The call log as a readable transcript (method, path, body). */
export function callTranscript(machine: WizardMachine): string {
  return machine.api.calls
    .map((c) => (c.body === undefined
      ? `${c.method} ${c.path}`
      : `${c.method} ${c.path}\n${JSON.stringify(c.body, null, 2)}`))
    .join("\n\n");
}
