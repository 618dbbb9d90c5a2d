/** DOM wiring: BEV click-to-place on the left, 3D review on the right,
 * category/instance pickers, fine-tune toolbar, submit.
 */

import { ApiClient } from "./api.js";
import { PlacementStore } from "./state.js";
import { ThreeView } from "./three_view.js";

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const api = new ApiClient("..");  // the bundle is served under /ui/
const store = new PlacementStore(api);

const bevCanvas = $<HTMLCanvasElement>("bev");
const bevCtx = bevCanvas.getContext("2d")!;
const view = new ThreeView($<HTMLCanvasElement>("view3d"));
let bevImage: HTMLImageElement | null = null;

function metersToPixels(x: number, y: number): [number, number] {
  const [x0, y0, x1, y1] = store.session!.bev_image_extents;
  return [
    ((x - x0) / (x1 - x0)) * bevCanvas.width,
    ((y1 - y) / (y1 - y0)) * bevCanvas.height,
  ];
}

function drawBev(): void {
  bevCtx.clearRect(0, 0, bevCanvas.width, bevCanvas.height);
  if (bevImage) {
    bevCtx.drawImage(bevImage, 0, 0, bevCanvas.width, bevCanvas.height);
  }
  if (!store.session) return;
  for (const p of store.placements) {
    const [fx0, fy0, fx1, fy1] = p.footprint;
    const [ax, ay] = metersToPixels(fx0, fy1);
    const [bx, by] = metersToPixels(fx1, fy0);
    bevCtx.strokeStyle = p.pid === store.selectedPid ? "#e06c4d" : "#4d9de0";
    bevCtx.lineWidth = 2;
    bevCtx.strokeRect(ax, ay, bx - ax, by - ay);
  }
}

function renderCategories(): void {
  const sel = $<HTMLSelectElement>("category");
  const cats = store.session ? store.session.categories : [];
  sel.innerHTML = "";
  for (const c of cats) {
    const opt = document.createElement("option");
    opt.value = c;
    opt.textContent = c;
    if (c === store.selectedCategory) opt.selected = true;
    sel.appendChild(opt);
  }
}

function renderInstances(): void {
  const list = $<HTMLDivElement>("instances");
  list.innerHTML = "";
  for (const inst of store.instances) {
    const btn = document.createElement("button");
    btn.className = "instance" + (inst.asset_id === store.selectedAsset ? " selected" : "");
    const d = inst.dims.map((v) => (v * 100).toFixed(0)).join("x");
    btn.textContent = `${inst.asset_id} (${d} cm)`;
    btn.onclick = () => store.selectAsset(inst.asset_id);
    list.appendChild(btn);
  }
}

function renderToolbar(): void {
  const placement = store.placements.find((p) => p.pid === store.selectedPid);
  const bar = $<HTMLDivElement>("toolbar");
  bar.classList.toggle("disabled", !placement);
  if (!placement) return;
  // sliders always show the server-confirmed pose (rejmap on 409)
  $<HTMLInputElement>("scale").value = String(placement.transform.scale);
  $<HTMLInputElement>("yaw").value = String(placement.transform.yaw);
  $<HTMLInputElement>("pitch").value = String(placement.transform.pitch);
  $<HTMLInputElement>("roll").value = String(placement.transform.roll);
}

function render(): void {
  const s = store.session;
  $<HTMLSpanElement>("status").textContent = s
    ? `${s.table.id} [${s.variant}] ${s.status}` : "no session";
  $<HTMLSpanElement>("message").textContent = store.message;
  const submit = $<HTMLButtonElement>("submit");
  submit.disabled = !store.canSubmit;
  if (store.lastSubmit) {
    $<HTMLSpanElement>("message").textContent =
      `stored ${store.lastSubmit.config_id}`;
  }
  renderCategories();
  renderInstances();
  renderToolbar();
  drawBev();
  if (s) {
    void view.syncPlacements(store.placements,
                             (assetId) => api.assetGltfUrl(assetId),
                             store.selectedPid);
  }
}

async function loadSession(): Promise<void> {
  const variant = $<HTMLSelectElement>("variant").value;
  await store.load(variant);
  const s = store.session!;
  bevImage = new Image();
  bevImage.onload = () => drawBev();
  bevImage.src = api.bevImageUrl(s.session_id);
  await view.loadTable(api.tableGltfUrl(s.session_id));
  if (s.categories.length) await store.selectCategory(s.categories[0]);
}

store.onChange(render);
view.onPick = (pid) => store.selectPlacement(pid);

$<HTMLButtonElement>("load").onclick = () => void loadSession();
$<HTMLSelectElement>("category").onchange = (e) =>
  void store.selectCategory(($<HTMLSelectElement>("category")).value);
bevCanvas.onclick = (e) => {
  const rect = bevCanvas.getBoundingClientRect();
  void store.clickBev({
    px: (e.clientX - rect.left) * (bevCanvas.width / rect.width),
    py: (e.clientY - rect.top) * (bevCanvas.height / rect.height),
    canvasWidth: bevCanvas.width,
    canvasHeight: bevCanvas.height,
  });
};
for (const control of ["scale", "yaw", "pitch", "roll"] as const) {
  $<HTMLInputElement>(control).onchange = () => {
    if (!store.selectedPid) return;
    void store.fineTune(store.selectedPid, {
      [control]: Number($<HTMLInputElement>(control).value),
    });
  };
}
$<HTMLButtonElement>("nudge-left").onclick = () =>
  store.selectedPid && void store.fineTune(store.selectedPid, { dx: -0.02 });
$<HTMLButtonElement>("nudge-right").onclick = () =>
  store.selectedPid && void store.fineTune(store.selectedPid, { dx: 0.02 });
$<HTMLButtonElement>("nudge-up").onclick = () =>
  store.selectedPid && void store.fineTune(store.selectedPid, { dy: 0.02 });
$<HTMLButtonElement>("nudge-down").onclick = () =>
  store.selectedPid && void store.fineTune(store.selectedPid, { dy: -0.02 });
$<HTMLButtonElement>("delete").onclick = () =>
  store.selectedPid && void store.deletePlacement(store.selectedPid);
$<HTMLButtonElement>("submit").onclick = () => void store.submitScene();

render();
