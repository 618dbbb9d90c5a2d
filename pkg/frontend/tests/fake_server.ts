/** In-memory stand-in for the placement service, mirroring its JSON shapes
 * and error contract: flat table at a known height, AABB collision, 422 off
 * the table, atomic PATCH. Used by the state unit tests; the e2e test talks
 * to the real server instead.
 */

import { PlacementDto, SessionDto } from "../src/api.js";

export const TABLE_TOP_Z = 0.75;
const TABLE_RECT = [-0.6, -0.4, 0.6, 0.4]; // xmin, ymin, xmax, ymax
const EXTENTS: [number, number, number, number] = [-0.65, -0.45, 0.65, 0.45];

const ASSETS: Record<string, { category: string; dims: [number, number, number] }> = {
  mug_00: { category: "mug", dims: [0.08, 0.08, 0.1] },
  book_00: { category: "book", dims: [0.21, 0.15, 0.03] },
  pencil_00: { category: "pencil", dims: [0.18, 0.01, 0.01] },
};

interface FakeState {
  session: SessionDto;
  nextPid: number;
  submitted: string | null;
  delayGate: Promise<void> | null;
}

export class FakeServer {
  state: FakeState = {
    session: {
      session_id: "fake1234",
      status: "open",
      variant: "vanilla",
      table: { id: "desk_fake", category: "desk", room: "room.ply" },
      bev_image_extents: EXTENTS,
      categories: ["book", "mug", "pencil"],
      placements: [],
    },
    nextPid: 0,
    submitted: null,
    delayGate: null,
  };
  requests: { method: string; path: string; body?: unknown }[] = [];

  /** fetch-compatible entry point for ApiClient. */
  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "").replace(/^\.\./, "");
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    this.requests.push({ method, path, body });
    if (this.state.delayGate) {
      await this.state.delayGate;
    }
    const [status, payload] = this.route(method, path, body);
    return new Response(status === 204 ? null : JSON.stringify(payload), {
      status,
      headers: { "content-type": "application/json" },
    });
  };

  private route(method: string, path: string, body: any): [number, unknown] {
    const s = this.state.session;
    if (method === "POST" && path === "/session") {
      return [201, structuredClone(s)];
    }
    if (method === "GET" && path === `/session/${s.session_id}`) {
      return [200, structuredClone(s)];
    }
    if (method === "GET" && path.startsWith(`/session/${s.session_id}/instances`)) {
      const category = decodeURIComponent(path.split("category=")[1]);
      if (!s.categories.includes(category)) {
        return [400, { error: "IncompatibleCategory", message: category }];
      }
      const instances = Object.entries(ASSETS)
        .filter(([, a]) => a.category === category)
        .map(([id, a]) => ({ asset_id: id, category: a.category, dims: a.dims, size: a.dims[0] }));
      return [200, { category, instances }];
    }
    if (method === "POST" && path === `/session/${s.session_id}/place`) {
      if (s.status !== "open") return [409, { error: "SessionClosed", message: "" }];
      const result = this.buildPlacement(body.asset_id, body.bev_xy, body.yaw ?? 0,
                                         body.scale ?? 1, null);
      if ("error" in result) return result.error;
      result.placement.pid = `p${this.state.nextPid++}`;
      s.placements.push(result.placement);
      return [201, structuredClone(result.placement)];
    }
    const patchMatch = path.match(new RegExp(`^/session/${s.session_id}/placement/(.+)$`));
    if (patchMatch) {
      const pid = patchMatch[1];
      const idx = s.placements.findIndex((p) => p.pid === pid);
      if (idx < 0) return [404, { error: "UnknownPlacement", message: pid }];
      if (s.status !== "open") return [409, { error: "SessionClosed", message: "" }];
      if (method === "DELETE") {
        s.placements.splice(idx, 1);
        return [204, null];
      }
      if (method === "PATCH") {
        const old = s.placements[idx];
        const cx = (old.footprint[0] + old.footprint[2]) / 2 + (body.dx ?? 0);
        const cy = (old.footprint[1] + old.footprint[3]) / 2 + (body.dy ?? 0);
        const result = this.buildPlacement(
          old.asset_id, [cx, cy],
          body.yaw ?? old.transform.yaw, body.scale ?? old.transform.scale, pid);
        if ("error" in result) return result.error;  // atomic: old stays
        result.placement.pid = pid;
        s.placements[idx] = result.placement;
        return [200, structuredClone(result.placement)];
      }
    }
    if (method === "POST" && path === `/session/${s.session_id}/submit`) {
      if (s.status !== "open") return [409, { error: "SessionClosed", message: "" }];
      if (!s.placements.length) return [409, { error: "EmptyScene", message: "" }];
      s.status = "submitted";
      this.state.submitted = JSON.stringify(s.placements);
      return [200, { config_id: "deadbeef", path: "/store/deadbeef.json" }];
    }
    return [404, { error: "UnknownSession", message: path }];
  }

  private buildPlacement(
    assetId: string, bevXy: [number, number], yaw: number, scale: number,
    ignorePid: string | null,
  ): { placement: PlacementDto } | { error: [number, unknown] } {
    const asset = ASSETS[assetId];
    if (!asset) return { error: [404, { error: "UnknownAsset", message: assetId }] };
    const hw = (asset.dims[0] * scale) / 2;
    const hd = (asset.dims[1] * scale) / 2;
    const foot: [number, number, number, number] =
      [bevXy[0] - hw, bevXy[1] - hd, bevXy[0] + hw, bevXy[1] + hd];
    if (foot[2] < TABLE_RECT[0] || foot[0] > TABLE_RECT[2]
        || foot[3] < TABLE_RECT[1] || foot[1] > TABLE_RECT[3]) {
      return { error: [422, { error: "OffTable", message: "footprint misses the table" }] };
    }
    for (const other of this.state.session.placements) {
      if (other.pid === ignorePid) continue;
      const o = other.footprint;
      if (foot[0] < o[2] && foot[2] > o[0] && foot[1] < o[3] && foot[3] > o[1]) {
        return { error: [409, { error: "Collision", message: `collides with ${other.pid}` }] };
      }
    }
    return {
      placement: {
        pid: "",
        asset_id: assetId,
        transform: {
          translation: [bevXy[0], bevXy[1], TABLE_TOP_Z],
          yaw, pitch: 0, roll: 0, scale,
        },
        footprint: foot,
      },
    };
  }
}
