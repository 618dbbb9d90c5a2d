/** Scripted end-to-end session against the real placement service:
 * load -> select a mug -> BEV click -> fine-tune yaw -> submit, then the
 * stored config is re-validated server-side. Runs the same client code the
 * browser uses (node's fetch stands in for the browser's).
 */

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { parseGltf } from "../src/gltf.js";
import { PlacementStore } from "../src/state.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const CANVAS = { canvasWidth: 480, canvasHeight: 480 };

let workdir: string;
let server: ChildProcess;

async function serverUp(): Promise<boolean> {
  try {
    const r = await fetch(`${BASE}/admin/progress`);
    return r.ok;
  } catch {
    return false;
  }
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "tablesim-e2e-"));
  execFileSync("tablesim", ["catalog", "--out", join(workdir, "cat"),
                            "--assets-per-category", "1"]);
  server = spawn("tablesim", [
    "serve", "--catalog", join(workdir, "cat", "catalog.json"),
    "--store", join(workdir, "store"), "--port", String(PORT), "--seed", "5",
  ], { stdio: "ignore" });
  for (let i = 0; i < 120; i++) {
    if (await serverUp()) return;
    await new Promise((res) => setTimeout(res, 250));
  }
  throw new Error("placement service did not come up");
}, 60_000);

afterAll(() => {
  server?.kill();
  rmSync(workdir, { recursive: true, force: true });
});

describe("scripted browser session against the live service", () => {
  it("places a mug by BEV click, fine-tunes, submits, and re-validates", async () => {
    const api = new ApiClient(BASE);
    const store = new PlacementStore(api);

    // "Load" until the random table offers mugs (4 of the 5 table types do)
    await store.load("vanilla");
    for (let tries = 0; tries < 10
         && !store.session!.categories.includes("mug"); tries++) {
      await store.load("vanilla");
    }
    expect(store.session!.categories).toContain("mug");

    // the 3D pane's data path: table + asset glTF parse into real geometry
    const tableGltf = await (await fetch(api.tableGltfUrl(store.session!.session_id))).text();
    expect(parseGltf(tableGltf).positions.length).toBeGreaterThan(0);

    await store.selectCategory("mug");
    expect(store.selectedAsset).toBe("mug_00");
    const assetGltf = await (await fetch(api.assetGltfUrl(store.selectedAsset!))).text();
    expect(parseGltf(assetGltf).indices.length).toBeGreaterThan(0);

    // click the middle of the BEV canvas
    const placed = await store.clickBev({ px: 240, py: 240, ...CANVAS });
    expect(placed, store.message).not.toBeNull();
    const serverZ = placed!.transform.translation[2];

    // the pose the 3D view displays is byte-for-byte the server's reply
    expect(store.placements[0].transform.translation[2]).toBe(serverZ);
    const mirrored = await api.getSession(store.session!.session_id);
    expect(mirrored.placements[0].transform.translation[2]).toBe(serverZ);

    // fine-tune yaw from the toolbar; the server re-calibrates the height
    // and the mirror again shows exactly what came back
    const tuned = await store.fineTune(placed!.pid, { yaw: 0.9 });
    expect(tuned, store.message).not.toBeNull();
    expect(tuned!.transform.yaw).toBeCloseTo(0.9, 12);
    expect(store.placements[0].transform.translation[2])
      .toBe(tuned!.transform.translation[2]);
    expect(tuned!.transform.translation[2]).toBeCloseTo(serverZ, 9);

    expect(await store.submitScene()).toBe(true);
    const stored = store.lastSubmit!;
    expect(stored.config_id).toMatch(/^[0-9a-f]{16}$/);

    // server-side re-validation of the stored scene config
    execFileSync("python3", ["-c", [
      "import sys",
      "from tablesim.catalog import load_catalog",
      "from tablesim.placement import SceneConfig, revalidate_config",
      `catalog = load_catalog(${JSON.stringify(join(workdir, "cat", "catalog.json"))})`,
      `config = SceneConfig.load(${JSON.stringify(stored.path)})`,
      "revalidate_config(config, catalog)",
      "print('revalidated', len(config.placements), 'placements')",
    ].join("\n")]);

    // reload after submit: the session is read-only
    await store.refresh();
    expect(store.session!.status).toBe("submitted");
    expect(store.canSubmit).toBe(false);
  }, 90_000);
});
