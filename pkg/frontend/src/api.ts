import type {
  ApiErrorBody,
  PathwayRequest,
  PathwaySnapshot,
  SingleStepResponse,
} from "./types.js";

export class ApiError extends Error {
  code: string;
  field: string | null;
  status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.field = body.field;
  }
}

async function post<T>(url: string, payload: unknown): Promise<T> {
  const response = await fetch(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body as ApiErrorBody);
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  async health(): Promise<{ status: string; models_loaded: boolean }> {
    const response = await fetch(`${this.baseUrl}/api/v1/health`);
    return response.json();
  }

  singleStep(request: {
    reactants: string;
    top_n?: number;
    k_atoms?: number;
    apply_rules?: boolean;
    pipeline?: string;
  }): Promise<SingleStepResponse> {
    return post(`${this.baseUrl}/api/v1/singlestep`, request);
  }

  createPathway(request: PathwayRequest): Promise<PathwaySnapshot> {
    return post(`${this.baseUrl}/api/v1/pathway`, request);
  }

  expand(sessionId: string, nodeId: number | null): Promise<PathwaySnapshot> {
    return post(
      `${this.baseUrl}/api/v1/pathway/${sessionId}/expand`,
      nodeId === null ? {} : { node_id: nodeId },
    );
  }
}
