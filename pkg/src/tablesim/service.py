"""HTTP backend for interactive scene transfer: session lifecycle, placement
transactions with atomic rollback, submission storage, and progress tracking.

Configs are persisted one JSON file per submission in a content-addressed
store directory; session timing lands in a separate ``.meta.json`` sidecar
so config files stay canonical.
"""

from __future__ import annotations

import hashlib
import io
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .catalog import AssetCatalog, candidate_categories, load_catalog
from .errors import (
    IncompatibleCategoryError,
    OffTableError,
    UnknownAssetError,
)
from .geometry import aabb_of, merge_meshes
from .gltf import mesh_to_gltf
from .placement import (
    Placement,
    SceneConfig,
    build_placement,
    check_collision,
    pack_tolerance,
    support_surface,
)

BEV_PAD = 0.05  # meters of margin around the table in the BEV image
BEV_WIDTH_PX = 480


@dataclass
class Session:
    session_id: str
    config: SceneConfig
    categories: list[str]
    bev_extents: tuple[float, float, float, float]
    status: str = "open"
    created_at: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)
    next_pid: int = 0


class PlaceRequest(BaseModel):
    asset_id: str
    bev_xy: tuple[float, float]
    yaw: float = 0.0
    scale: float = 1.0


class AdjustRequest(BaseModel):
    dx: float = 0.0
    dy: float = 0.0
    yaw: Optional[float] = None
    pitch: Optional[float] = None
    roll: Optional[float] = None
    scale: Optional[float] = None


class SessionRequest(BaseModel):
    variant: str = "vanilla"


def _placement_payload(p: Placement) -> dict:
    d = p.to_dict()
    d["pid"] = p.pid
    return d


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": code, "message": message})


def create_app(catalog: AssetCatalog, store_dir, seed: int = 0,
               ui_dir=None) -> FastAPI:
    """Build the placement service around a catalog and a config store."""
    store = Path(store_dir)
    store.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="tablesim placement service")
    rng = np.random.default_rng(seed)
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    gltf_cache: dict[str, bytes] = {}

    def get_session(session_id: str) -> Optional[Session]:
        return sessions.get(session_id)

    def session_payload(s: Session) -> dict:
        table = catalog.table(s.config.table_id)
        return {
            "session_id": s.session_id,
            "status": s.status,
            "variant": s.config.variant,
            "table": {"id": table.id, "category": table.category,
                      "room": table.room},
            "bev_image_extents": list(s.bev_extents),
            "categories": s.categories,
            "placements": [_placement_payload(p) for p in s.config.placements],
        }

    @app.post("/session", status_code=201)
    def open_session(req: SessionRequest = SessionRequest()):
        try:
            catalog.require_nonempty()
        except Exception as e:
            return _error(503, "EmptyCatalog", str(e))
        with registry_lock:
            table = catalog.tables[int(rng.integers(len(catalog.tables)))]
            session_id = uuid.uuid4().hex[:12]
        mesh = catalog.table_mesh(table.id)
        bmin, bmax = aabb_of(mesh)
        extents = (float(bmin[0] - BEV_PAD), float(bmin[1] - BEV_PAD),
                   float(bmax[0] + BEV_PAD), float(bmax[1] + BEV_PAD))
        config = SceneConfig(room_ref=table.room, table_id=table.id,
                             seed=int(seed), variant=req.variant)
        session = Session(session_id=session_id, config=config,
                          categories=candidate_categories(table.id, catalog),
                          bev_extents=extents)
        with registry_lock:
            sessions[session_id] = session
        return session_payload(session)

    @app.get("/session/{session_id}")
    def read_session(session_id: str):
        s = get_session(session_id)
        if s is None:
            return _error(404, "UnknownSession", session_id)
        return session_payload(s)

    @app.get("/session/{session_id}/bev.png")
    def bev_image(session_id: str):
        s = get_session(session_id)
        if s is None:
            return _error(404, "UnknownSession", session_id)
        png = render_bev_png(catalog, s.config.table_id, s.bev_extents)
        return Response(content=png, media_type="image/png")

    @app.get("/session/{session_id}/table.gltf")
    def table_gltf(session_id: str):
        s = get_session(session_id)
        if s is None:
            return _error(404, "UnknownSession", session_id)
        key = f"table:{s.config.table_id}"
        if key not in gltf_cache:
            merged = merge_meshes([catalog.room_mesh(s.config.table_id),
                                   catalog.table_mesh(s.config.table_id)])
            gltf_cache[key] = mesh_to_gltf(merged, name=s.config.table_id)
        return Response(content=gltf_cache[key], media_type="model/gltf+json")

    @app.get("/assets/{asset_id}.gltf")
    def asset_gltf(asset_id: str):
        key = f"asset:{asset_id}"
        if key not in gltf_cache:
            try:
                mesh = catalog.object_mesh(asset_id)
            except UnknownAssetError as e:
                return _error(404, "UnknownAsset", str(e))
            gltf_cache[key] = mesh_to_gltf(mesh, name=asset_id)
        return Response(content=gltf_cache[key], media_type="model/gltf+json")

    @app.get("/session/{session_id}/instances")
    def list_instances(session_id: str, category: str):
        s = get_session(session_id)
        if s is None:
            return _error(404, "UnknownSession", session_id)
        if category not in s.categories:
            return _error(400, "IncompatibleCategory",
                          f"'{category}' not offered for this table")
        out = []
        for obj in catalog.objects_of_category(category):
            bmin, bmax = aabb_of(catalog.object_mesh(obj.id))
            out.append({"asset_id": obj.id, "category": obj.category,
                        "dims": [float(v) for v in (bmax - bmin)],
                        "size": obj.size})
        return {"category": category, "instances": out}

    @app.post("/session/{session_id}/place", status_code=201)
    def place_asset(session_id: str, req: PlaceRequest):
        s = get_session(session_id)
        if s is None:
            return _error(404, "UnknownSession", session_id)
        with s.lock:
            if s.status != "open":
                return _error(409, "SessionClosed", "session already submitted")
            try:
                p = build_placement(s.config, catalog, req.asset_id, req.bev_xy,
                                    yaw=req.yaw, scale=req.scale)
            except UnknownAssetError as e:
                return _error(404, "UnknownAsset", str(e))
            except IncompatibleCategoryError as e:
                return _error(400, "IncompatibleCategory", str(e))
            except OffTableError as e:
                return _error(422, "OffTable", str(e))
            hits = check_collision(p, s.config.placements, catalog,
                                   tolerance=pack_tolerance(s.config.variant))
            if hits:
                ids = [s.config.placements[i].pid for i in hits]
                return _error(409, "Collision", f"collides with {ids}")
            p.pid = f"p{s.next_pid}"
            s.next_pid += 1
            s.config.placements.append(p)
            return _placement_payload(p)

    @app.patch("/session/{session_id}/placement/{pid}")
    def adjust_placement(session_id: str, pid: str, req: AdjustRequest):
        s = get_session(session_id)
        if s is None:
            return _error(404, "UnknownSession", session_id)
        with s.lock:
            if s.status != "open":
                return _error(409, "SessionClosed", "session already submitted")
            idx = next((i for i, p in enumerate(s.config.placements)
                        if p.pid == pid), None)
            if idx is None:
                return _error(404, "UnknownPlacement", pid)
            old = s.config.placements[idx]
            fx0, fy0, fx1, fy1 = old.footprint
            center = ((fx0 + fx1) / 2 + req.dx, (fy0 + fy1) / 2 + req.dy)
            t = old.transform
            try:
                newp = build_placement(
                    s.config, catalog, old.asset_id, center,
                    yaw=t.yaw if req.yaw is None else req.yaw,
                    scale=t.scale if req.scale is None else req.scale,
                    pitch=t.pitch if req.pitch is None else req.pitch,
                    roll=t.roll if req.roll is None else req.roll)
            except OffTableError as e:
                return _error(422, "OffTable", str(e))
            others = s.config.placements[:idx] + s.config.placements[idx + 1:]
            hits = check_collision(newp, others, catalog,
                                   tolerance=pack_tolerance(s.config.variant))
            if hits:
                # atomic: prior placement stays untouched
                ids = [others[i].pid for i in hits]
                return _error(409, "Collision", f"adjustment collides with {ids}")
            newp.pid = old.pid
            s.config.placements[idx] = newp
            return _placement_payload(newp)

    @app.delete("/session/{session_id}/placement/{pid}", status_code=204)
    def delete_placement(session_id: str, pid: str):
        s = get_session(session_id)
        if s is None:
            return _error(404, "UnknownSession", session_id)
        with s.lock:
            if s.status != "open":
                return _error(409, "SessionClosed", "session already submitted")
            idx = next((i for i, p in enumerate(s.config.placements)
                        if p.pid == pid), None)
            if idx is None:
                return _error(404, "UnknownPlacement", pid)
            s.config.placements.pop(idx)
        return Response(status_code=204)

    @app.post("/session/{session_id}/submit")
    def submit(session_id: str):
        s = get_session(session_id)
        if s is None:
            return _error(404, "UnknownSession", session_id)
        with s.lock:
            if s.status != "open":
                return _error(409, "SessionClosed", "session already submitted")
            if not s.config.placements:
                return _error(409, "EmptyScene", "nothing placed yet")
            payload = s.config.dumps()
            # hash salted with the session id: one file per submitted session
            # even when two workers build byte-identical scenes
            config_id = hashlib.sha256(
                f"{s.session_id}\n{payload}".encode()).hexdigest()[:16]
            path = store / f"{config_id}.json"
            path.write_text(payload)
            meta = {"session_seconds": time.time() - s.created_at,
                    "variant": s.config.variant,
                    "session_id": s.session_id}
            (store / f"{config_id}.meta.json").write_text(
                json.dumps(meta, indent=2, sort_keys=True) + "\n")
            s.status = "submitted"
            return {"config_id": config_id, "path": str(path)}

    @app.get("/admin/progress")
    def progress():
        stored = sorted(p for p in store.glob("*.json")
                        if not p.name.endswith(".meta.json"))
        by_variant: dict[str, int] = {}
        durations = []
        for p in stored:
            meta_path = store / f"{p.stem}.meta.json"
            variant = "unknown"
            if meta_path.exists():
                meta = json.loads(meta_path.read_text())
                variant = meta.get("variant", "unknown")
                if "session_seconds" in meta:
                    durations.append(float(meta["session_seconds"]))
            by_variant[variant] = by_variant.get(variant, 0) + 1
        return {
            "open_sessions": sum(1 for s in sessions.values() if s.status == "open"),
            "submitted": len(stored),
            "by_variant": by_variant,
            "avg_session_seconds":
                float(np.mean(durations)) if durations else None,
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def render_bev_png(catalog: AssetCatalog, table_id: str, extents,
                   width_px: int = BEV_WIDTH_PX) -> bytes:
    """Top-down orthographic height-shaded PNG of the table."""
    from PIL import Image

    x0, y0, x1, y1 = extents
    aspect = (y1 - y0) / (x1 - x0)
    h_px = max(2, int(round(width_px * aspect)))
    surface = support_surface(catalog.table_mesh(table_id))
    xs = np.linspace(x0, x1, width_px)
    ys = np.linspace(y0, y1, h_px)
    gx, gy = np.meshgrid(xs, ys)  # row-major: rows are y
    heights = surface.heights_at(np.column_stack([gx.ravel(), gy.ravel()]))
    grid = heights.reshape(h_px, width_px)
    valid = ~np.isnan(grid)
    img = np.full(grid.shape, 20, dtype=np.uint8)
    if valid.any():
        lo = np.nanmin(grid)
        hi = np.nanmax(grid)
        span = (hi - lo) if hi > lo else 1.0
        shade = 80 + 160 * (grid[valid] - lo) / span
        img[valid] = np.clip(shade, 0, 255).astype(np.uint8)
    # image row 0 should be the max-y edge so +y points up on screen
    img = img[::-1]
    buf = io.BytesIO()
    Image.fromarray(img, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def serve(catalog_path, store_dir, host: str = "127.0.0.1", port: int = 8008,
          seed: int = 0, ui_dir=None) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    catalog = load_catalog(catalog_path)
    app = create_app(catalog, store_dir, seed=seed, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)
