import { ApiClient } from "./api";
import { WizardMachine } from "./state";
import { WizardView } from "./ui";

const root = document.getElementById("wizard");
if (!root) {
  throw new Error("missing #wizard mount point");
}
const base = (root.dataset.apiBase ?? "").replace(/\/$/, "");
new WizardView(new WizardMachine(new ApiClient(base)), root);
