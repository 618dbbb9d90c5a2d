/** UI placement state: a mirror of the server's session, never a source of
 * geometry truth. Every pose shown in the 3D view comes verbatim from a
 * server response; the client computes no heights.
 */

import {
  ApiClient,
  ApiError,
  InstanceDto,
  PlacementDto,
  SessionDto,
} from "./api.js";

export type Listener = () => void;

export interface BevPixel {
  px: number;
  py: number;
  canvasWidth: number;
  canvasHeight: number;
}

export class PlacementStore {
  session: SessionDto | null = null;
  instances: InstanceDto[] = [];
  selectedCategory: string | null = null;
  selectedAsset: string | null = null;
  selectedPid: string | null = null;
  pending = false;
  message = "";
  lastSubmit: { config_id: string; path: string } | null = null;

  private listeners: Listener[] = [];

  constructor(private api: ApiClient) {}

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l();
  }

  get placements(): PlacementDto[] {
    return this.session ? this.session.placements : [];
  }

  /** BEV pixel -> table-plane meters via the server-provided extents.
   * Row 0 of the BEV image is the +y edge of the extent rectangle. */
  pixelToMeters(pixel: BevPixel): [number, number] {
    if (!this.session) throw new Error("no session");
    const [x0, y0, x1, y1] = this.session.bev_image_extents;
    const x = x0 + (pixel.px / pixel.canvasWidth) * (x1 - x0);
    const y = y1 - (pixel.py / pixel.canvasHeight) * (y1 - y0);
    return [x, y];
  }

  async load(variant = "vanilla"): Promise<void> {
    this.session = await this.api.openSession(variant);
    this.instances = [];
    this.selectedCategory = null;
    this.selectedAsset = null;
    this.selectedPid = null;
    this.message = "";
    this.lastSubmit = null;
    this.emit();
  }

  /** Re-sync the whole mirror from GET /session (server is source of truth). */
  async refresh(): Promise<void> {
    if (!this.session) return;
    this.session = await this.api.getSession(this.session.session_id);
    if (this.selectedPid &&
        !this.session.placements.some((p) => p.pid === this.selectedPid)) {
      this.selectedPid = null;
    }
    this.emit();
  }

  async selectCategory(category: string): Promise<void> {
    if (!this.session) throw new Error("no session");
    const reply = await this.api.listInstances(this.session.session_id, category);
    this.selectedCategory = category;
    this.instances = reply.instances;
    this.selectedAsset = reply.instances.length ? reply.instances[0].asset_id : null;
    this.emit();
  }

  selectAsset(assetId: string): void {
    this.selectedAsset = assetId;
    this.emit();
  }

  selectPlacement(pid: string | null): void {
    this.selectedPid = pid;
    this.emit();
  }

  /** One mutation in flight at a time; the server stays the arbiter. */
  private async mutate<T>(op: () => Promise<T>): Promise<T | null> {
    if (!this.session) throw new Error("no session");
    if (this.pending) {
      this.message = "previous edit still in flight";
      this.emit();
      return null;
    }
    this.pending = true;
    this.message = "";
    this.emit();
    try {
      return await op();
    } catch (err) {
      if (err instanceof ApiError) {
        // surfaced inline; the local mirror stays exactly at server state
        this.message = `${err.code}: ${err.message}`;
        return null;
      }
      throw err;
    } finally {
      this.pending = false;
      this.emit();
    }
  }

  /** Click on the BEV: convert to meters and ask the server to place the
   * selected instance there. On success the returned pose (with the
   * calibrated height) is appended to the mirror. */
  async clickBev(pixel: BevPixel, yaw = 0, scale = 1): Promise<PlacementDto | null> {
    if (!this.selectedAsset) {
      this.message = "pick an instance first";
      this.emit();
      return null;
    }
    const [x, y] = this.pixelToMeters(pixel);
    const placed = await this.mutate(() =>
      this.api.place(this.session!.session_id, {
        asset_id: this.selectedAsset!,
        bev_xy: [x, y],
        yaw,
        scale,
      }),
    );
    if (placed) {
      this.session!.placements.push(placed);
      this.selectedPid = placed.pid;
      this.emit();
    }
    return placed;
  }

  /** Toolbar fine-tune; on 409/422 nothing changes locally (sliders revert
   * to the mirrored server state on the next render). */
  async fineTune(pid: string, req: {
    dx?: number; dy?: number; yaw?: number; pitch?: number; roll?: number;
    scale?: number;
  }): Promise<PlacementDto | null> {
    const updated = await this.mutate(() =>
      this.api.adjust(this.session!.session_id, pid, req),
    );
    if (updated) {
      const idx = this.session!.placements.findIndex((p) => p.pid === pid);
      if (idx >= 0) this.session!.placements[idx] = updated;
      this.emit();
    }
    return updated;
  }

  async deletePlacement(pid: string): Promise<boolean> {
    const ok = await this.mutate(async () => {
      await this.api.remove(this.session!.session_id, pid);
      return true;
    });
    if (ok) {
      this.session!.placements = this.session!.placements.filter(
        (p) => p.pid !== pid,
      );
      if (this.selectedPid === pid) this.selectedPid = null;
      this.emit();
    }
    return Boolean(ok);
  }

  get canSubmit(): boolean {
    return Boolean(this.session && this.session.status === "open"
      && this.session.placements.length > 0 && !this.pending);
  }

  async submitScene(): Promise<boolean> {
    const done = await this.mutate(() => this.api.submit(this.session!.session_id));
    if (done) {
      this.lastSubmit = done;
      this.session!.status = "submitted";
      this.emit();
    }
    return Boolean(done);
  }
}
