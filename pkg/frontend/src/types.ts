/** Wire formats of the wrapper service HTTP API. */

export interface FieldRecordJson {
  css_selector: string;
  type: string;
  name: string;
  value: string;
  placeholder: string;
  description: string;
  fillable: boolean;
  ui_mark: string;
  checked?: boolean;
  select_index?: number;
}

export interface ButtonCandidateJson {
  css_selector: string;
  source_kind: string;
  confidence_rank: number;
  label: string;
  ui_mark: string;
}

export interface FormRecordJson {
  css_selector: string;
  main_btn_index: number | null;
  input_list: FieldRecordJson[];
  query_button_list: ButtonCandidateJson[];
  synthetic: boolean;
}

export interface FormAnalysisJson {
  url: string;
  main_form_index: number | null;
  forms: FormRecordJson[];
}

export interface AnalyzeResponse {
  analysis: FormAnalysisJson;
  annotated_html: string;
}

export interface BlockMetricsJson {
  sub_block_count: number;
  word_count: number;
  size_proxy: number;
}

export interface BlockJson {
  parent_selector: string;
  sub_block_selectors: string[];
  signature: string[];
  metrics: BlockMetricsJson;
}

export interface TextRuleJson {
  id: number;
  rank: number;
  css_selector: string;
}

export interface ImageRuleJson {
  id: number;
  type: string;
  css_selector: string;
}

export interface LinkRuleJson {
  id: number;
  css_selector: string;
  texts: TextRuleJson[];
  images: ImageRuleJson[];
}

export interface RulesJson {
  texts: TextRuleJson[];
  images: ImageRuleJson[];
  links: LinkRuleJson[];
}

export interface FieldNameJson {
  field_id: number;
  name: string;
  provenance: string;
}

export interface SegmentEntry {
  rank: number;
  fallback: boolean;
  block: BlockJson;
  rules: RulesJson | null;
  field_names: FieldNameJson[];
}

export interface SegmentResponse {
  url: string;
  blocks: SegmentEntry[];
  annotated_html: string;
}

export interface SourceSpec {
  url?: string;
  html?: string;
}

export interface SegmentRequest {
  source: SourceSpec;
  form_choice?: number;
  button_choice?: number;
  field_values?: Record<string, string>;
  top_n?: number;
}

export interface ServiceBlockDraft {
  name: string;
  block: BlockJson;
  rules: RulesJson;
  field_names: FieldNameJson[];
}

export interface ServiceDraft {
  name: string;
  description: string;
  source_url: string;
  form_analysis?: FormAnalysisJson;
  field_bindings?: Record<string, string>;
  example_values?: Record<string, string>;
  blocks: ServiceBlockDraft[];
}

export interface CreateResponse {
  id: number;
  api_url: string;
  api_key: string;
}

export interface InvokeResponse {
  service_id: number;
  blocks: Record<string, Record<string, unknown>[]>;
  pages_fetched: number;
  dropped_params: string[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
