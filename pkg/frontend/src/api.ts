/** Thin client over the published HTTP routes.
 *
 * Every call is recorded, so a finished wizard run can be exported as the
 * equivalent CLI/HTTP sequence. No extraction logic lives here.
 */

import type {
  AnalyzeResponse, ApiErrorBody, CreateResponse, InvokeResponse,
  SegmentRequest, SegmentResponse, ServiceDraft, SourceSpec,
} from "./types";

export interface CallRecord {
  method: string;
  path: string;
  body?: unknown;
}

export class WizardApiError extends Error {
  constructor(readonly status: number, readonly body: ApiErrorBody) {
    super(`${body.code}: ${body.message}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly calls: CallRecord[] = [];

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    this.calls.push(body === undefined ? { method, path } : { method, path, body });
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) {
      throw new WizardApiError(response.status, parsed as ApiErrorBody);
    }
    return parsed as T;
  }

  analyze(source: SourceSpec): Promise<AnalyzeResponse> {
    return this.request("POST", "/wrappers/analyze", { source });
  }

  segment(body: SegmentRequest): Promise<SegmentResponse> {
    return this.request("POST", "/wrappers/segment", body);
  }

  createService(draft: ServiceDraft): Promise<CreateResponse> {
    return this.request("POST", "/wrappers", draft);
  }

  getWrapper(id: number): Promise<Record<string, unknown>> {
    return this.request("GET", `/wrappers/${id}`);
  }

  invoke(id: number, params: Record<string, string>): Promise<InvokeResponse> {
    const query = new URLSearchParams(params).toString();
    const path = query ? `/call_service/${id}?${query}` : `/call_service/${id}`;
    return this.request("GET", path);
  }
}
