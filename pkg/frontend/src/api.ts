/** Thin typed client for the complexity session service. The fetch function is
 * injectable so tests can run against an in-memory service. */

import type {
  ManipulateResponse,
  ReportEnvelope,
  SceneDocument,
  SceneResponse,
  SessionCreated,
  UndoResponse,
} from "./types.js";

export interface MinimalResponse {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<MinimalResponse>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly pointer?: string,
  ) {
    super(message);
  }
}

async function unwrap<T>(res: MinimalResponse): Promise<T> {
  const body = (await res.json()) as Record<string, unknown>;
  if (res.status >= 400) {
    throw new ApiError(
      res.status,
      typeof body.error === "string" ? body.error : `request failed (${res.status})`,
      typeof body.pointer === "string" ? body.pointer : undefined,
    );
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike,
  ) {}

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }).then((res) => unwrap<T>(res));
  }

  private get<T>(path: string): Promise<T> {
    return this.fetchFn(`${this.baseUrl}${path}`).then((res) => unwrap<T>(res));
  }

  createSession(scene: SceneDocument, path = "main"): Promise<SessionCreated> {
    return this.post("/api/sessions", { scene, path });
  }

  getReport(session: string): Promise<ReportEnvelope> {
    return this.get(`/api/sessions/${session}/report`);
  }

  getScene(session: string): Promise<SceneResponse> {
    return this.get(`/api/sessions/${session}/scene`);
  }

  manipulate(session: string, request: Record<string, unknown>): Promise<ManipulateResponse> {
    return this.post(`/api/sessions/${session}/manipulate`, request);
  }

  undo(session: string): Promise<UndoResponse> {
    return this.post(`/api/sessions/${session}/undo`, {});
  }
}
