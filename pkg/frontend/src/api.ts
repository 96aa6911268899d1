import type {
  ConstraintsPayload,
  DemoLabel,
  DemoPayload,
  IterateResponse,
  ReproductionPayload,
  SessionPayload,
} from "./types";

export class ApiError extends Error {
  status: number;
  detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

async function parseDetail(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return res.statusText || "request failed";
  }
}

export class StudioClient {
  baseUrl: string;

  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await fetch(this.baseUrl + path, init);
    if (!res.ok) {
      throw new ApiError(res.status, await parseDetail(res));
    }
    return (await res.json()) as T;
  }

  createSession(id: string, config: Record<string, unknown> = {}) {
    return this.request<{ session_id: string; version: number }>(
      "POST", "/sessions", { id, config });
  }

  getSession(id: string) {
    return this.request<SessionPayload>("GET", `/sessions/${id}`);
  }

  addDemo(sid: string, demo: Omit<DemoPayload, "dim">, expectedVersion?: number) {
    const body: Record<string, unknown> = { ...demo };
    if (expectedVersion !== undefined) body.expected_version = expectedVersion;
    return this.request<{ version: number; demo_id: string }>(
      "POST", `/sessions/${sid}/demos`, body);
  }

  relabelDemo(sid: string, demoId: string, label: DemoLabel, expectedVersion?: number) {
    const body: Record<string, unknown> = { label };
    if (expectedVersion !== undefined) body.expected_version = expectedVersion;
    return this.request<{ version: number }>(
      "PATCH", `/sessions/${sid}/demos/${demoId}`, body);
  }

  deleteDemo(sid: string, demoId: string, expectedVersion: number) {
    return this.request<{ version: number }>(
      "DELETE",
      `/sessions/${sid}/demos/${demoId}?expected_version=${expectedVersion}`);
  }

  setConstraints(sid: string, constraints: ConstraintsPayload, expectedVersion?: number) {
    const body: Record<string, unknown> = { ...constraints };
    if (expectedVersion !== undefined) body.expected_version = expectedVersion;
    return this.request<{ version: number }>(
      "PUT", `/sessions/${sid}/constraints`, body);
  }

  setConfig(sid: string, config: Record<string, unknown>, expectedVersion?: number) {
    const body: Record<string, unknown> = { config };
    if (expectedVersion !== undefined) body.expected_version = expectedVersion;
    return this.request<{ version: number }>(
      "PUT", `/sessions/${sid}/config`, body);
  }

  reproduce(sid: string) {
    return this.request<{ session_id: string; version: number; reproduction: ReproductionPayload }>(
      "POST", `/sessions/${sid}/reproduce`, {});
  }

  iterate(sid: string, label: DemoLabel) {
    return this.request<IterateResponse>(
      "POST", `/sessions/${sid}/iterate`, { label });
  }

  metrics(a: { points: number[][] }, b: { points: number[][] }) {
    return this.request<{ sse: number; sea: number; crv: number }>(
      "POST", "/metrics", { a, b });
  }
}
