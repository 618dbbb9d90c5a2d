import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { PlacementStore } from "../src/state.js";
import { FakeServer, TABLE_TOP_Z } from "./fake_server.js";

const CANVAS = { canvasWidth: 480, canvasHeight: 480 };

let server: FakeServer;
let store: PlacementStore;

beforeEach(async () => {
  server = new FakeServer();
  store = new PlacementStore(new ApiClient("http://fake", server.fetch));
  await store.load();
  await store.selectCategory("mug");
});

describe("bev click to place", () => {
  it("converts the clicked pixel to table meters via the extents", async () => {
    // canvas center maps to the extent center (0, 0)
    await store.clickBev({ px: 240, py: 240, ...CANVAS });
    const placeReq = server.requests.find((r) => r.path.endsWith("/place"));
    const [x, y] = (placeReq!.body as { bev_xy: [number, number] }).bev_xy;
    expect(x).toBeCloseTo(0, 10);
    expect(y).toBeCloseTo(0, 10);

    // row 0 is the +y edge: clicking the top-left corner gives (x0, y1)
    const [cx, cy] = store.pixelToMeters({ px: 0, py: 0, ...CANVAS });
    expect(cx).toBeCloseTo(-0.65, 10);
    expect(cy).toBeCloseTo(0.45, 10);
  });

  it("appends the server-confirmed pose; the object rests on the table", async () => {
    const placed = await store.clickBev({ px: 240, py: 240, ...CANVAS });
    expect(placed).not.toBeNull();
    expect(store.placements).toHaveLength(1);
    // the displayed z is exactly the server's calibrated height
    expect(store.placements[0].transform.translation[2]).toBe(TABLE_TOP_Z);
    expect(store.selectedPid).toBe(placed!.pid);
  });

  it("surfaces OffTable as a message without local mutation", async () => {
    const placed = await store.clickBev({ px: 3, py: 3, ...CANVAS });
    expect(placed).toBeNull();
    expect(store.placements).toHaveLength(0);
    expect(store.message).toMatch(/OffTable/);
  });

  it("surfaces Collision and keeps the mirror at server state", async () => {
    await store.clickBev({ px: 240, py: 240, ...CANVAS });
    const before = JSON.stringify(store.placements);
    const placed = await store.clickBev({ px: 240, py: 240, ...CANVAS });
    expect(placed).toBeNull();
    expect(store.message).toMatch(/Collision/);
    expect(JSON.stringify(store.placements)).toBe(before);
  });

  it("requires an instance selection first", async () => {
    store.selectedAsset = null;
    const placed = await store.clickBev({ px: 240, py: 240, ...CANVAS });
    expect(placed).toBeNull();
    expect(store.message).toMatch(/instance/);
    expect(server.requests.some((r) => r.path.endsWith("/place"))).toBe(false);
  });
});

describe("fine-tune toolbar", () => {
  it("patches yaw and mirrors the server reply", async () => {
    const placed = await store.clickBev({ px: 240, py: 240, ...CANVAS });
    const updated = await store.fineTune(placed!.pid, { yaw: 1.57 });
    expect(updated!.transform.yaw).toBeCloseTo(1.57);
    expect(store.placements[0].transform.yaw).toBeCloseTo(1.57);
  });

  it("reverts to server state when the adjustment collides", async () => {
    const a = await store.clickBev({ px: 200, py: 240, ...CANVAS });
    const b = await store.clickBev({ px: 300, py: 240, ...CANVAS });
    expect(a && b).toBeTruthy();
    const before = JSON.stringify(store.placements);
    const updated = await store.fineTune(b!.pid, { dx: -0.27 });
    expect(updated).toBeNull();
    expect(store.message).toMatch(/Collision/);
    expect(JSON.stringify(store.placements)).toBe(before); // sliders re-read this
  });

  it("deletes a placement and clears the selection", async () => {
    const placed = await store.clickBev({ px: 240, py: 240, ...CANVAS });
    expect(await store.deletePlacement(placed!.pid)).toBe(true);
    expect(store.placements).toHaveLength(0);
    expect(store.selectedPid).toBeNull();
  });

  it("selection changes never touch geometry", async () => {
    await store.clickBev({ px: 240, py: 240, ...CANVAS });
    const before = JSON.stringify(store.placements);
    store.selectPlacement(null);
    store.selectPlacement(store.placements[0].pid);
    expect(JSON.stringify(store.placements)).toBe(before);
  });
});

describe("single in-flight mutation", () => {
  it("rejects a second mutation while one is pending", async () => {
    let release: () => void = () => {};
    server.state.delayGate = new Promise((res) => { release = res; });
    const first = store.clickBev({ px: 240, py: 240, ...CANVAS });
    const second = await store.clickBev({ px: 300, py: 240, ...CANVAS });
    expect(second).toBeNull();
    expect(store.message).toMatch(/in flight/);
    release();
    expect(await first).not.toBeNull();
    expect(store.placements).toHaveLength(1);
  });
});

describe("submit", () => {
  it("is disabled while the scene is empty", () => {
    expect(store.canSubmit).toBe(false);
  });

  it("stores the config and freezes the session", async () => {
    await store.clickBev({ px: 240, py: 240, ...CANVAS });
    expect(store.canSubmit).toBe(true);
    expect(await store.submitScene()).toBe(true);
    expect(store.lastSubmit!.config_id).toBe("deadbeef");
    expect(store.session!.status).toBe("submitted");
    expect(store.canSubmit).toBe(false);
    // further edits are rejected by the server and surfaced inline
    const placed = await store.clickBev({ px: 300, py: 240, ...CANVAS });
    expect(placed).toBeNull();
    expect(store.message).toMatch(/SessionClosed/);
  });
});

describe("refresh", () => {
  it("reconstructs the exact scene from GET /session", async () => {
    await store.clickBev({ px: 240, py: 240, ...CANVAS });
    await store.clickBev({ px: 330, py: 240, ...CANVAS });
    const mirrored = JSON.stringify(store.placements);
    // wipe the local mirror, then refresh from the server
    store.session!.placements = [];
    await store.refresh();
    expect(JSON.stringify(store.placements)).toBe(mirrored);
  });
});
