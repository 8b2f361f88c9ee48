// Typed client for the what-if service. The console does no probability
// arithmetic of its own: every number it shows comes out of these calls.

export interface FactorInfo {
  id: string;
  label: string;
  impact: number;
}

export interface ModelCreated {
  model_id: string;
  factors: FactorInfo[];
  revision: number;
}

export interface SessionSnapshot {
  model_id: string;
  factors: FactorInfo[];
  base_cost: number;
  evidence: Record<string, string>;
  revision: number;
  created_at: string;
  updated_at: string;
}

export interface RevisionResponse {
  revision: number;
}

export interface InferResponse {
  probability: number;
  percentage: number;
  cost: number;
  posterior: Record<string, number>;
  evidence: Record<string, string>;
  revision: number;
}

export interface SensitivityRow {
  state: string;
  posterior: Record<string, number>;
  expected_utility: number;
}

export interface SensitivityResponse {
  vary: string;
  target_state: string;
  rows: SensitivityRow[];
  spread: number;
  revision: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function describeDetail(detail: unknown): string {
  if (typeof detail === "string") return detail;
  if (Array.isArray(detail)) {
    return detail
      .map((entry) =>
        entry && typeof entry === "object" && "msg" in entry
          ? `${(entry as { loc?: unknown[] }).loc?.join(".") ?? ""}: ${(entry as { msg: string }).msg}`
          : JSON.stringify(entry),
      )
      .join("; ");
  }
  return JSON.stringify(detail);
}

export class MastApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let message = `${response.status}`;
      try {
        const payload = (await response.json()) as { detail?: unknown };
        if (payload.detail !== undefined) message = describeDetail(payload.detail);
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(response.status, message);
    }
    return (await response.json()) as T;
  }

  createModel(impacts: number[], baseCost?: number): Promise<ModelCreated> {
    const body: { impacts: number[]; base_cost?: number } = { impacts };
    if (baseCost !== undefined) body.base_cost = baseCost;
    return this.request("POST", "/api/models", body);
  }

  getModel(modelId: string): Promise<SessionSnapshot> {
    return this.request("GET", `/api/models/${modelId}`);
  }

  patchImpacts(modelId: string, impacts: number[]): Promise<SessionSnapshot> {
    return this.request("PATCH", `/api/models/${modelId}/impacts`, { impacts });
  }

  setEvidence(modelId: string, factorId: string, state: string): Promise<RevisionResponse> {
    return this.request("PUT", `/api/models/${modelId}/evidence/${factorId}`, { state });
  }

  clearEvidence(modelId: string, factorId: string): Promise<RevisionResponse> {
    return this.request("DELETE", `/api/models/${modelId}/evidence/${factorId}`);
  }

  infer(modelId: string): Promise<InferResponse> {
    return this.request("POST", `/api/models/${modelId}/infer`);
  }

  sensitivity(modelId: string, vary: string): Promise<SensitivityResponse> {
    return this.request("POST", `/api/models/${modelId}/sensitivity`, { vary });
  }

  exportUrl(modelId: string, format: "xdsl" | "native"): string {
    return `${this.baseUrl}/api/models/${modelId}/export?format=${format}`;
  }
}
