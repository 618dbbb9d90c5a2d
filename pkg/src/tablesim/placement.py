"""BEV click -> calibrated 3D placement: support-height calibration, collision
rules, procedural generation, and the editable scene-config record.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import constants
from .catalog import AssetCatalog, candidate_categories
from .errors import (
    CollisionError,
    IncompatibleCategoryError,
    OffTableError,
    PlacementExhaustedError,
    ValidationError,
)
from .geometry import (
    BBox3D,
    RigidPlacementTransform,
    TriMesh,
    aabb_of,
    apply_transform,
    merge_meshes,
    rotation_z,
)
from .labels import FURNITURE_IDS, TABLETOP_IDS

VARIANTS = ("vanilla", "crowd", "whole_room")


def pack_tolerance(variant: str) -> float:
    """Allowed AABB overlap slab: crowd scenes tolerate 1mm, others none."""
    return constants.PACK_TOLERANCE_CROWD if variant == "crowd" else 0.0


@dataclass
class Placement:
    """One placed asset: transform plus its BEV footprint rectangle."""

    asset_id: str
    transform: RigidPlacementTransform
    footprint: tuple[float, float, float, float]  # (xmin, ymin, xmax, ymax)
    pid: Optional[str] = None  # stable id for interactive editing

    def to_dict(self) -> dict:
        d = {
            "asset_id": self.asset_id,
            "transform": self.transform.to_dict(),
            "footprint": [float(v) for v in self.footprint],
        }
        if self.pid is not None:
            d["pid"] = self.pid
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Placement":
        return cls(
            asset_id=d["asset_id"],
            transform=RigidPlacementTransform.from_dict(d["transform"]),
            footprint=tuple(float(v) for v in d["footprint"]),
            pid=d.get("pid"),
        )


@dataclass
class SceneConfig:
    """Parameterized, editable scene record; re-materializes deterministically."""

    room_ref: str
    table_id: str
    placements: list[Placement] = field(default_factory=list)
    seed: int = 0
    variant: str = "vanilla"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant '{self.variant}'")

    def to_dict(self) -> dict:
        return {
            "room_ref": self.room_ref,
            "table_id": self.table_id,
            "placements": [p.to_dict() for p in self.placements],
            "seed": int(self.seed),
            "variant": self.variant,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneConfig":
        return cls(
            room_ref=d["room_ref"],
            table_id=d["table_id"],
            placements=[Placement.from_dict(p) for p in d.get("placements", [])],
            seed=int(d.get("seed", 0)),
            variant=d.get("variant", "vanilla"),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "SceneConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


class SupportSurface:
    """Height queries against a table mesh's upward-facing surface."""

    def __init__(self, table: TriMesh):
        v = table.vertices
        tri = v[table.faces]                     # (M, 3, 3)
        self.tri = tri
        self.bev_min = tri[:, :, :2].min(axis=1)  # per-triangle BEV AABB
        self.bev_max = tri[:, :, :2].max(axis=1)
        self.extent_min = v[:, :2].min(axis=0)
        self.extent_max = v[:, :2].max(axis=0)
        self.top_z = float(v[:, 2].max())
        self.vertices = v

    def heights_at(self, points_xy: np.ndarray) -> np.ndarray:
        """Highest table-surface z under each BEV point (NaN where none)."""
        pts = np.atleast_2d(np.asarray(points_xy, dtype=np.float64))
        best = np.full(len(pts), np.nan)
        pmin = pts.min(axis=0)
        pmax = pts.max(axis=0)
        cand = np.nonzero(
            (self.bev_min[:, 0] <= pmax[0]) & (self.bev_max[:, 0] >= pmin[0])
            & (self.bev_min[:, 1] <= pmax[1]) & (self.bev_max[:, 1] >= pmin[1])
        )[0]
        for t in cand:
            a, b, c = self.tri[t]
            inside = np.nonzero(
                (pts[:, 0] >= self.bev_min[t, 0]) & (pts[:, 0] <= self.bev_max[t, 0])
                & (pts[:, 1] >= self.bev_min[t, 1]) & (pts[:, 1] <= self.bev_max[t, 1])
            )[0]
            if not len(inside):
                continue
            p = pts[inside]
            det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
            if abs(det) < 1e-18:
                continue  # vertical triangle: no BEV area
            w1 = ((p[:, 0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[:, 1] - a[1])) / det
            w2 = ((b[0] - a[0]) * (p[:, 1] - a[1]) - (p[:, 0] - a[0]) * (b[1] - a[1])) / det
            w0 = 1.0 - w1 - w2
            eps = 1e-12
            ok = (w0 >= -eps) & (w1 >= -eps) & (w2 >= -eps)
            if not ok.any():
                continue
            z = w0[ok] * a[2] + w1[ok] * b[2] + w2[ok] * c[2]
            sel = inside[ok]
            cur = best[sel]
            best[sel] = np.where(np.isnan(cur), z, np.maximum(cur, z))
        return best

    def max_height_in_rect(self, rect, grid: float = constants.SUPPORT_GRID_DEFAULT) -> float:
        """Support height: max surface z sampled on a grid inside the rect,
        plus exact triangle vertices falling inside it."""
        x0, y0, x1, y1 = rect
        cx0 = max(x0, self.extent_min[0])
        cy0 = max(y0, self.extent_min[1])
        cx1 = min(x1, self.extent_max[0])
        cy1 = min(y1, self.extent_max[1])
        if cx0 > cx1 or cy0 > cy1:
            raise OffTableError("footprint does not overlap the table BEV extent")
        xs = np.arange(cx0, cx1 + grid * 0.5, grid)
        ys = np.arange(cy0, cy1 + grid * 0.5, grid)
        xs[-1] = min(xs[-1], cx1)
        ys[-1] = min(ys[-1], cy1)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        heights = self.heights_at(np.column_stack([gx.ravel(), gy.ravel()]))
        best = np.nanmax(heights) if not np.isnan(heights).all() else np.nan
        v = self.vertices
        in_rect = ((v[:, 0] >= cx0) & (v[:, 0] <= cx1)
                   & (v[:, 1] >= cy0) & (v[:, 1] <= cy1))
        if in_rect.any():
            vz = v[in_rect, 2].max()
            best = vz if np.isnan(best) else max(best, vz)
        if np.isnan(best):
            raise OffTableError("footprint overlaps the table AABB but no surface")
        return float(best)


_SURFACE_CACHE: dict[int, SupportSurface] = {}


def support_surface(table: TriMesh) -> SupportSurface:
    """Per-mesh cached SupportSurface (catalog meshes are immutable)."""
    key = id(table)
    surf = _SURFACE_CACHE.get(key)
    if surf is None or surf.vertices is not table.vertices:
        surf = SupportSurface(table)
        _SURFACE_CACHE[key] = surf
    return surf


def calibrate_height(table: TriMesh, footprint,
                     grid: float = constants.SUPPORT_GRID_DEFAULT) -> float:
    """Support height for a BEV footprint over the table surface."""
    return support_surface(table).max_height_in_rect(footprint, grid=grid)


def placement_aabb(p: Placement, catalog: AssetCatalog):
    """World AABB of the placed object's transformed mesh."""
    mesh = catalog.object_mesh(p.asset_id)
    verts = p.transform.apply_points(mesh.vertices)
    return verts.min(axis=0), verts.max(axis=0)


def check_collision(p: Placement, others: Sequence[Placement],
                    catalog: AssetCatalog, tolerance: float = 0.0) -> list[int]:
    """Indices of ``others`` whose AABB overlaps p's beyond the tolerance slab.

    Overlap counts as collision when the intersection box is thicker than
    ``tolerance`` along every axis; face contact is always allowed.
    """
    amin, amax = placement_aabb(p, catalog)
    hits = []
    for i, other in enumerate(others):
        bmin, bmax = placement_aabb(other, catalog)
        overlap = np.minimum(amax, bmax) - np.maximum(amin, bmin)
        if (overlap > tolerance).all():
            hits.append(i)
    return hits


def _prepared_vertices(catalog: AssetCatalog, asset_id: str, yaw: float,
                       pitch: float, roll: float, scale: float) -> np.ndarray:
    mesh = catalog.object_mesh(asset_id)
    t = RigidPlacementTransform(translation=(0.0, 0.0, 0.0), yaw=yaw,
                                pitch=pitch, roll=roll, scale=scale)
    return t.apply_points(mesh.vertices)


def build_placement(config: SceneConfig, catalog: AssetCatalog, asset_id: str,
                    bev_xy, yaw: float, scale: float = 1.0,
                    pitch: float = 0.0, roll: float = 0.0,
                    surface: Optional[SupportSurface] = None) -> Placement:
    """Construct the calibrated placement without mutating the config.

    The object's rotated AABB is centered on ``bev_xy`` and dropped so its
    lowest vertex sits exactly on the local support height.
    """
    table = catalog.table(config.table_id)
    obj = catalog.object(asset_id)
    allowed = candidate_categories(config.table_id, catalog)
    if obj.category not in allowed:
        raise IncompatibleCategoryError(
            f"'{obj.category}' not allowed on '{table.category}'")
    if surface is None:
        surface = support_surface(catalog.table_mesh(config.table_id))

    rv = _prepared_vertices(catalog, asset_id, yaw, pitch, roll, scale)
    vmin = rv.min(axis=0)
    vmax = rv.max(axis=0)
    center_xy = (vmin[:2] + vmax[:2]) / 2.0
    tx = float(bev_xy[0] - center_xy[0])
    ty = float(bev_xy[1] - center_xy[1])
    footprint = (vmin[0] + tx, vmin[1] + ty, vmax[0] + tx, vmax[1] + ty)
    z_support = surface.max_height_in_rect(footprint)
    tz = z_support - float(vmin[2])
    # flush contact must hold at a vertex: the support height may come from
    # a footprint cell the body never touches (empty AABB corner over the
    # table, or a bump under a vertex-free stretch of the bottom face);
    # committing such a placement would leave the object floating
    world = rv + np.array([tx, ty, tz])
    under = surface.heights_at(world[:, :2])
    with np.errstate(invalid="ignore"):
        gaps = world[:, 2] - under
    if np.isnan(gaps).all() or np.nanmin(gaps) > 1e-6:
        raise OffTableError("object has no vertex resting on the support height")
    transform = RigidPlacementTransform(translation=(tx, ty, tz), yaw=yaw,
                                        pitch=pitch, roll=roll, scale=scale)
    return Placement(asset_id=asset_id, transform=transform, footprint=footprint)


def place(config: SceneConfig, catalog: AssetCatalog, asset_id: str, bev_xy,
          yaw: float = 0.0, scale: float = 1.0,
          surface: Optional[SupportSurface] = None) -> Placement:
    """Click-to-place: calibrate height, reject collisions, append to config."""
    p = build_placement(config, catalog, asset_id, bev_xy, yaw, scale,
                        surface=surface)
    hits = check_collision(p, config.placements, catalog,
                           tolerance=pack_tolerance(config.variant))
    if hits:
        raise CollisionError(hits)
    config.placements.append(p)
    return p


def procedural_place(config: SceneConfig, catalog: AssetCatalog,
                     count_range: Optional[tuple[int, int]] = None,
                     seed: Optional[int] = None,
                     max_attempts: int = constants.PLACE_MAX_ATTEMPTS) -> SceneConfig:
    """Headless stand-in for crowd workers: rejection-sample placements.

    Draws n ~ Uniform over ``count_range`` compatible objects at uniform
    in-table BEV positions/yaws; deterministic for a given seed.
    """
    if count_range is None:
        count_range = constants.VARIANT_COUNT_RANGES[config.variant]
    rng = np.random.default_rng(config.seed if seed is None else seed)
    surface = support_surface(catalog.table_mesh(config.table_id))
    cats = [c for c in candidate_categories(config.table_id, catalog)
            if catalog.objects_of_category(c)]
    if not cats:
        raise PlacementExhaustedError("no placeable categories for this table")
    lo, hi = count_range
    n = int(rng.integers(lo, hi + 1))
    placed = 0
    for _ in range(n):
        for _attempt in range(max_attempts):
            cat = cats[int(rng.integers(len(cats)))]
            assets = catalog.objects_of_category(cat)
            asset = assets[int(rng.integers(len(assets)))]
            x = float(rng.uniform(surface.extent_min[0], surface.extent_max[0]))
            y = float(rng.uniform(surface.extent_min[1], surface.extent_max[1]))
            yaw = float(rng.uniform(-math.pi, math.pi))
            try:
                place(config, catalog, asset.id, (x, y), yaw=yaw, surface=surface)
            except (CollisionError, OffTableError):
                continue
            placed += 1
            break
    if placed < lo:
        raise PlacementExhaustedError(
            f"placed {placed} < minimum {lo} after {max_attempts} attempts each")
    return config


@dataclass
class MaterializedScene:
    """A realized config: labeled union mesh, gt boxes, and table context."""

    mesh: TriMesh
    boxes: list[BBox3D]
    table_id: str
    table_center: np.ndarray   # table vertex centroid (look-at target)
    table_top_z: float
    table_diag: float          # BEV diagonal of the table extent
    arc_deg: tuple[float, float]
    config: SceneConfig


def oriented_box_of(vertices: np.ndarray, yaw: float, semantic_id: int,
                    instance_id: int) -> BBox3D:
    """Tight yaw-aligned box: AABB taken in the un-yawed frame of the object.

    Dims are inflated by a nanometer so the generating vertices stay inside
    under floating-point rounding of the frame change.
    """
    rot = rotation_z(-yaw)
    local = vertices @ rot.T
    lmin = local.min(axis=0)
    lmax = local.max(axis=0)
    center_local = (lmin + lmax) / 2.0
    center = rotation_z(yaw) @ center_local
    dims = np.maximum(lmax - lmin, 0.0) + 2e-9
    return BBox3D(center=center, dims=dims, yaw=yaw,
                  semantic_id=semantic_id, instance_id=instance_id)


def materialize(config: SceneConfig, catalog: AssetCatalog,
                include_room: bool = True) -> MaterializedScene:
    """Room + table + placed objects as one labeled mesh, with one gt box
    per placement (instance ids in placement order)."""
    table_mesh = catalog.table_mesh(config.table_id)
    table = catalog.table(config.table_id)
    parts = []
    if include_room:
        parts.append(catalog.room_mesh(config.table_id))
    tlab = np.zeros((table_mesh.n_vertices, 2), dtype=np.int32)
    tlab[:, 0] = FURNITURE_IDS["table"]
    tlab[:, 1] = -1
    parts.append(TriMesh(table_mesh.vertices, table_mesh.faces, tlab))

    boxes = []
    for inst, p in enumerate(config.placements):
        obj = catalog.object(p.asset_id)
        sid = TABLETOP_IDS[obj.category]
        mesh = apply_transform(catalog.object_mesh(p.asset_id), p.transform)
        lab = np.empty((mesh.n_vertices, 2), dtype=np.int32)
        lab[:, 0] = sid
        lab[:, 1] = inst
        parts.append(TriMesh(mesh.vertices, mesh.faces, lab))
        boxes.append(oriented_box_of(mesh.vertices, p.transform.yaw, sid, inst))

    merged = merge_meshes(parts)
    tmin, tmax = aabb_of(table_mesh)
    diag = float(np.hypot(tmax[0] - tmin[0], tmax[1] - tmin[1]))
    return MaterializedScene(
        mesh=merged,
        boxes=boxes,
        table_id=config.table_id,
        table_center=table_mesh.vertices.mean(axis=0),
        table_top_z=float(tmax[2]),
        table_diag=diag,
        arc_deg=table.arc_deg,
        config=config,
    )


def contact_gap(p: Placement, catalog: AssetCatalog,
                surface: SupportSurface) -> float:
    """Min over object vertices of (vertex z - support height under it).

    Zero means flush contact; negative means interpenetration. Vertices
    overhanging past the table surface are ignored.
    """
    mesh = catalog.object_mesh(p.asset_id)
    verts = p.transform.apply_points(mesh.vertices)
    heights = surface.heights_at(verts[:, :2])
    ok = ~np.isnan(heights)
    if not ok.any():
        return math.nan
    return float((verts[ok, 2] - heights[ok]).min())


def revalidate_config(config: SceneConfig, catalog: AssetCatalog,
                      contact_tol: float = 1e-6) -> None:
    """Re-check the stored-config invariants: the object's lowest point sits
    exactly on the calibrated support height, some vertex is above the table,
    and placements stay mutually collision-free.

    Raises CollisionError/OffTableError/ValidationError on the first breach.
    """
    surface = support_surface(catalog.table_mesh(config.table_id))
    tol = pack_tolerance(config.variant)
    for i, p in enumerate(config.placements):
        verts = p.transform.apply_points(catalog.object_mesh(p.asset_id).vertices)
        z_support = surface.max_height_in_rect(p.footprint)
        err = float(verts[:, 2].min() - z_support)
        if abs(err) > contact_tol:
            raise ValidationError(
                f"placement {i} bottom is {err:+.2e} m off its support height")
        gap = contact_gap(p, catalog, surface)
        if math.isnan(gap) or abs(gap) > contact_tol:
            raise OffTableError(
                f"placement {i} has no vertex resting on the support (gap {gap})")
        hits = check_collision(p, config.placements[:i], catalog, tolerance=tol)
        if hits:
            raise CollisionError(hits)
