/** Typed client for the grading service HTTP API. The console consumes
 * exactly these endpoints; all grading truth lives on the server. */

export interface DimensionResultView {
  dimension_id: string;
  score: number;
  confidence: number;
  feedback_text: string;
  model_version: string;
}

export interface MasterView {
  essay_id: string;
  results: Record<string, DimensionResultView>;
  final_score: string;
  produced_at: string;
  model_manifest: [string, string][];
}

export interface ReviewEditView {
  score_override: number | null;
  feedback_override: string | null;
}

export interface EssayView {
  essay_id: string;
  customer_name: string;
  submitted_at: string;
  body: string;
}

export interface JobView {
  job_id: string;
  state: string;
  essay: EssayView;
  master: MasterView | null;
  review_edits: Record<string, ReviewEditView>;
  failure_cause: string | null;
  approver_note: string | null;
  created_at: string;
  updated_at: string;
  final_score_display?: string;
  final_score?: string;
}

export interface JobSummary {
  job_id: string;
  state: string;
  essay_id: string;
  customer_name: string;
  created_at: string;
  updated_at: string;
}

export interface JobListing {
  jobs: JobSummary[];
  total: number;
}

export interface ReviewEditsPayload {
  edits: Record<string, { score_override?: number | null; feedback_override?: string | null }>;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Server-reported failure: carries the structured {code, message} body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly dimensionId?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The service is unreachable (network refused, DNS, timeout). */
export class ConnectionError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConnectionError";
  }
}

async function parseFailure(response: Response): Promise<ApiError> {
  let code = "unknown_error";
  let message = `HTTP ${response.status}`;
  let dimensionId: string | undefined;
  try {
    const body = await response.json();
    if (body && typeof body.code === "string") {
      code = body.code;
      message = typeof body.message === "string" ? body.message : message;
      dimensionId = typeof body.dimension_id === "string" ? body.dimension_id : undefined;
    }
  } catch {
    // non-JSON error body: keep the HTTP status message
  }
  return new ApiError(response.status, code, message, dimensionId);
}

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(readonly baseUrl: string, fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (exc) {
      throw new ConnectionError(exc instanceof Error ? exc.message : String(exc));
    }
    if (!response.ok) {
      throw await parseFailure(response);
    }
    return response;
  }

  async listJobs(state?: string, limit = 50, offset = 0): Promise<JobListing> {
    const query = new URLSearchParams();
    if (state !== undefined) {
      query.set("state", state);
    }
    query.set("limit", String(limit));
    query.set("offset", String(offset));
    const response = await this.request(`/v1/jobs?${query}`);
    return (await response.json()) as JobListing;
  }

  async getJob(jobId: string): Promise<JobView> {
    const response = await this.request(`/v1/jobs/${encodeURIComponent(jobId)}`);
    return (await response.json()) as JobView;
  }

  async putReview(jobId: string, payload: ReviewEditsPayload): Promise<JobView> {
    const response = await this.request(`/v1/jobs/${encodeURIComponent(jobId)}/review`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return (await response.json()) as JobView;
  }

  async approve(jobId: string, note?: string): Promise<JobView> {
    const response = await this.request(`/v1/jobs/${encodeURIComponent(jobId)}/approve`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(note === undefined ? {} : { note }),
    });
    return (await response.json()) as JobView;
  }

  reportUrl(jobId: string, format: "structured" | "printable"): string {
    return `${this.baseUrl}/v1/jobs/${encodeURIComponent(jobId)}/report?format=${format}`;
  }

  async fetchReport(jobId: string, format: "structured" | "printable"): Promise<string> {
    const response = await this.request(
      `/v1/jobs/${encodeURIComponent(jobId)}/report?format=${format}`,
    );
    return await response.text();
  }
}
