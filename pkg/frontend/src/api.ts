// Thin typed client for the service API. All state lives server-side;
// the UI never computes probabilities or neighbors itself.

import type {
  ClassificationsPage,
  Correction,
  CorrectionReceipt,
  ModelInfo,
  Projection,
  ReplaySummary,
  RetrainResult,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export class RetrainInProgressError extends ApiError {
  constructor() {
    super(409, "retrain in progress");
  }
}

export class NoModelError extends ApiError {
  constructor() {
    super(503, "no trained model yet");
  }
}

async function parseError(res: Response): Promise<ApiError> {
  if (res.status === 409) return new RetrainInProgressError();
  if (res.status === 503) return new NoModelError();
  let detail = res.statusText;
  try {
    const body = await res.json();
    detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(res.status, detail);
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const res = await fetch(this.base + path);
    if (!res.ok) throw await parseError(res);
    return (await res.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw await parseError(res);
    return (await res.json()) as T;
  }

  listReplays(): Promise<ReplaySummary[]> {
    return this.get("/v1/replays");
  }

  getClassifications(
    replayId: string,
    opts: { uncertain?: boolean; classId?: string; page?: number; pageSize?: number } = {},
  ): Promise<ClassificationsPage> {
    const params = new URLSearchParams();
    if (opts.uncertain !== undefined) params.set("uncertain", String(opts.uncertain));
    if (opts.classId !== undefined) params.set("class_id", opts.classId);
    params.set("page", String(opts.page ?? 1));
    params.set("page_size", String(opts.pageSize ?? 500));
    return this.get(
      `/v1/replays/${encodeURIComponent(replayId)}/classifications?${params.toString()}`,
    );
  }

  postCorrections(corrections: Correction[]): Promise<CorrectionReceipt> {
    return this.post("/v1/corrections", corrections);
  }

  retrain(): Promise<RetrainResult> {
    return this.post("/v1/retrain", {});
  }

  getModel(): Promise<ModelInfo> {
    return this.get("/v1/model");
  }

  getProjection(): Promise<Projection> {
    return this.get("/v1/projection");
  }
}
