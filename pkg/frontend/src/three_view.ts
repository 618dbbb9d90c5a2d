/** Live 3D review pane: the room/table plus every placement at exactly the
 * pose the server returned. Drag orbits the camera; geometry never moves
 * unless the server says so.
 */

import * as THREE from "three";

import { PlacementDto } from "./api.js";
import { parseGltf } from "./gltf.js";

const OBJECT_COLOR = 0x4d9de0;
const SELECTED_COLOR = 0xe06c4d;
const TABLE_COLOR = 0x9a9a8f;

export class ThreeView {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private target = new THREE.Vector3(0, 0, 0.6);
  private azimuth = -1.1;
  private elevation = 0.7;
  private distance = 2.4;
  private objects = new Map<string, THREE.Mesh>();
  private geomCache = new Map<string, THREE.BufferGeometry>();
  private tableRoot: THREE.Object3D | null = null;
  private dragging = false;
  private lastX = 0;
  private lastY = 0;
  onPick: ((pid: string | null) => void) | null = null;

  constructor(private canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.scene.background = new THREE.Color(0x1c1e24);
    this.camera = new THREE.PerspectiveCamera(55, 1, 0.01, 100);
    this.camera.up.set(0, 0, 1); // world z is up

    this.scene.add(new THREE.AmbientLight(0xffffff, 0.65));
    const sun = new THREE.DirectionalLight(0xffffff, 1.4);
    sun.position.set(2, -3, 4);
    this.scene.add(sun);
    const fill = new THREE.DirectionalLight(0xaaccff, 0.5);
    fill.position.set(-3, 2, 2);
    this.scene.add(fill);

    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    canvas.addEventListener("pointerup", (e) => this.pointerUp(e));
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.distance *= Math.exp(e.deltaY * 0.001);
      this.distance = Math.min(12, Math.max(0.3, this.distance));
    }, { passive: false });

    const loop = () => {
      this.resize();
      this.updateCamera();
      this.renderer.render(this.scene, this.camera);
      requestAnimationFrame(loop);
    };
    requestAnimationFrame(loop);
  }

  private resize(): void {
    const w = this.canvas.clientWidth;
    const h = this.canvas.clientHeight;
    if (w && h && (this.canvas.width !== w || this.canvas.height !== h)) {
      this.renderer.setSize(w, h, false);
      this.camera.aspect = w / h;
      this.camera.updateProjectionMatrix();
    }
  }

  private updateCamera(): void {
    const ce = Math.cos(this.elevation);
    this.camera.position.set(
      this.target.x + this.distance * ce * Math.cos(this.azimuth),
      this.target.y + this.distance * ce * Math.sin(this.azimuth),
      this.target.z + this.distance * Math.sin(this.elevation),
    );
    this.camera.lookAt(this.target);
  }

  private pointerDown(e: PointerEvent): void {
    this.dragging = true;
    this.lastX = e.clientX;
    this.lastY = e.clientY;
    this.canvas.setPointerCapture(e.pointerId);
  }

  private pointerMove(e: PointerEvent): void {
    if (!this.dragging) return;
    const dx = e.clientX - this.lastX;
    const dy = e.clientY - this.lastY;
    this.lastX = e.clientX;
    this.lastY = e.clientY;
    this.azimuth -= dx * 0.008;
    this.elevation = Math.min(1.5, Math.max(-0.2, this.elevation + dy * 0.008));
  }

  private pointerUp(e: PointerEvent): void {
    const moved = Math.hypot(e.clientX - this.lastX, e.clientY - this.lastY);
    this.dragging = false;
    if (moved < 3 && this.onPick) {
      this.onPick(this.pick(e));
    }
  }

  private pick(e: PointerEvent): string | null {
    const rect = this.canvas.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((e.clientX - rect.left) / rect.width) * 2 - 1,
      -((e.clientY - rect.top) / rect.height) * 2 + 1,
    );
    const ray = new THREE.Raycaster();
    ray.setFromCamera(ndc, this.camera);
    const hits = ray.intersectObjects([...this.objects.values()]);
    if (!hits.length) return null;
    for (const [pid, mesh] of this.objects) {
      if (mesh === hits[0].object) return pid;
    }
    return null;
  }

  private async fetchGeometry(url: string): Promise<THREE.BufferGeometry> {
    const cached = this.geomCache.get(url);
    if (cached) return cached;
    const resp = await fetch(url);
    const parsed = parseGltf(await resp.text());
    const geom = new THREE.BufferGeometry();
    geom.setAttribute("position", new THREE.BufferAttribute(parsed.positions, 3));
    geom.setIndex(new THREE.BufferAttribute(parsed.indices, 1));
    geom.computeVertexNormals();
    this.geomCache.set(url, geom);
    return geom;
  }

  async loadTable(url: string): Promise<void> {
    if (this.tableRoot) this.scene.remove(this.tableRoot);
    const geom = await this.fetchGeometry(url);
    const mesh = new THREE.Mesh(geom, new THREE.MeshStandardMaterial({
      color: TABLE_COLOR, roughness: 0.9, side: THREE.DoubleSide,
    }));
    this.tableRoot = mesh;
    this.scene.add(mesh);
    geom.computeBoundingBox();
    const bb = geom.boundingBox!;
    this.target.set(0, 0, bb.max.z * 0.5);
    this.distance = Math.max(1.2, bb.max.x - bb.min.x);
  }

  /** Mirror the store's placements: create/update/remove one mesh per pid.
   * Transform order matches the server: scale, then yaw(z).pitch(y).roll(x),
   * then translation. */
  async syncPlacements(placements: PlacementDto[], assetUrl: (assetId: string) => string,
                       selectedPid: string | null): Promise<void> {
    const seen = new Set<string>();
    for (const p of placements) {
      seen.add(p.pid);
      let mesh = this.objects.get(p.pid);
      if (!mesh) {
        const geom = await this.fetchGeometry(assetUrl(p.asset_id));
        mesh = new THREE.Mesh(geom, new THREE.MeshStandardMaterial({
          color: OBJECT_COLOR, roughness: 0.7,
        }));
        this.objects.set(p.pid, mesh);
        this.scene.add(mesh);
      }
      const t = p.transform;
      mesh.position.set(t.translation[0], t.translation[1], t.translation[2]);
      mesh.rotation.set(t.roll, t.pitch, t.yaw, "ZYX");
      mesh.scale.setScalar(t.scale);
      (mesh.material as THREE.MeshStandardMaterial).color.setHex(
        p.pid === selectedPid ? SELECTED_COLOR : OBJECT_COLOR);
    }
    for (const [pid, mesh] of [...this.objects]) {
      if (!seen.has(pid)) {
        this.scene.remove(mesh);
        this.objects.delete(pid);
      }
    }
  }
}
