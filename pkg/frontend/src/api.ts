/** Typed client for the placement service HTTP API. */

export interface TransformDto {
  translation: [number, number, number];
  yaw: number;
  pitch: number;
  roll: number;
  scale: number;
}

export interface PlacementDto {
  pid: string;
  asset_id: string;
  transform: TransformDto;
  footprint: [number, number, number, number];
}

export interface SessionDto {
  session_id: string;
  status: "open" | "submitted";
  variant: string;
  table: { id: string; category: string; room: string };
  bev_image_extents: [number, number, number, number];
  categories: string[];
  placements: PlacementDto[];
}

export interface InstanceDto {
  asset_id: string;
  category: string;
  dims: [number, number, number];
  size: number;
}

export interface PlaceRequest {
  asset_id: string;
  bev_xy: [number, number];
  yaw?: number;
  scale?: number;
}

export interface AdjustRequest {
  dx?: number;
  dy?: number;
  yaw?: number;
  pitch?: number;
  roll?: number;
  scale?: number;
}

export interface SubmitDto {
  config_id: string;
  path: string;
}

/** Non-2xx server replies carry a machine-readable error code. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (resp.status === 204) {
      return undefined as T;
    }
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, payload.error ?? "Unknown", payload.message ?? "");
    }
    return payload as T;
  }

  openSession(variant = "vanilla"): Promise<SessionDto> {
    return this.request("POST", "/session", { variant });
  }

  getSession(sessionId: string): Promise<SessionDto> {
    return this.request("GET", `/session/${sessionId}`);
  }

  listInstances(sessionId: string, category: string): Promise<{ category: string; instances: InstanceDto[] }> {
    return this.request("GET", `/session/${sessionId}/instances?category=${encodeURIComponent(category)}`);
  }

  place(sessionId: string, req: PlaceRequest): Promise<PlacementDto> {
    return this.request("POST", `/session/${sessionId}/place`, req);
  }

  adjust(sessionId: string, pid: string, req: AdjustRequest): Promise<PlacementDto> {
    return this.request("PATCH", `/session/${sessionId}/placement/${pid}`, req);
  }

  remove(sessionId: string, pid: string): Promise<void> {
    return this.request("DELETE", `/session/${sessionId}/placement/${pid}`);
  }

  submit(sessionId: string): Promise<SubmitDto> {
    return this.request("POST", `/session/${sessionId}/submit`);
  }

  bevImageUrl(sessionId: string): string {
    return `${this.baseUrl}/session/${sessionId}/bev.png`;
  }

  tableGltfUrl(sessionId: string): string {
    return `${this.baseUrl}/session/${sessionId}/table.gltf`;
  }

  assetGltfUrl(assetId: string): string {
    return `${this.baseUrl}/assets/${encodeURIComponent(assetId)}.gltf`;
  }
}
