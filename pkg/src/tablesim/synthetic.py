"""Self-contained synthetic catalog: parametric stand-ins for CAD objects,
tables and rooms, so the whole pipeline runs without external datasets.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .catalog import AssetCatalog, CatalogObject, CatalogTable, save_catalog
from .geometry import TriMesh, merge_meshes
from .labels import DEFAULT_COMPATIBILITY, FURNITURE_IDS, TABLETOP_CLASSES
from .meshio import save_mesh
from .primitives import (
    box_from_bounds,
    box_mesh,
    cylinder_mesh,
    grid_plane,
    sphere_on_ground,
    table_mesh,
)

# category -> (shape, nominal dims in meters)
#   box: (sx, sy, sz)   cylinder: (radius, height)   sphere: (radius,)
OBJECT_SHAPES: dict[str, tuple] = {
    "bag": ("box", (0.35, 0.15, 0.35)),
    "bottle": ("cylinder", (0.035, 0.25)),
    "bowl": ("cylinder", (0.08, 0.06)),
    "camera": ("box", (0.13, 0.08, 0.08)),
    "can": ("cylinder", (0.033, 0.12)),
    "cap": ("cylinder", (0.11, 0.1)),
    "clock": ("box", (0.2, 0.06, 0.2)),
    "keyboard": ("box", (0.44, 0.14, 0.03)),
    "display": ("box", (0.55, 0.18, 0.35)),
    "earphone": ("box", (0.18, 0.16, 0.08)),
    "jar": ("cylinder", (0.05, 0.15)),
    "knife": ("box", (0.22, 0.02, 0.015)),
    "lamp": ("cylinder", (0.12, 0.45)),
    "laptop": ("box", (0.33, 0.23, 0.025)),
    "microphone": ("cylinder", (0.03, 0.18)),
    "microwave": ("box", (0.48, 0.35, 0.28)),
    "mug": ("cylinder", (0.04, 0.1)),
    "printer": ("box", (0.42, 0.35, 0.25)),
    "remote control": ("box", (0.17, 0.05, 0.02)),
    "phone": ("box", (0.15, 0.075, 0.008)),
    "alarm": ("box", (0.12, 0.06, 0.1)),
    "book": ("box", (0.21, 0.15, 0.03)),
    "cake": ("cylinder", (0.1, 0.08)),
    "calculator": ("box", (0.15, 0.08, 0.015)),
    "candle": ("cylinder", (0.025, 0.12)),
    "charger": ("box", (0.06, 0.03, 0.025)),
    "chessboard": ("box", (0.4, 0.4, 0.02)),
    "coffee machine": ("box", (0.25, 0.3, 0.35)),
    "comb": ("box", (0.15, 0.035, 0.01)),
    "cutting board": ("box", (0.35, 0.25, 0.015)),
    "dishes": ("cylinder", (0.12, 0.05)),
    "doll": ("sphere", (0.08,)),
    "eraser": ("box", (0.05, 0.02, 0.012)),
    "eye glasses": ("box", (0.14, 0.14, 0.04)),
    "file box": ("box", (0.32, 0.12, 0.25)),
    "fork": ("box", (0.19, 0.025, 0.012)),
    "fruit": ("sphere", (0.04,)),
    "globe": ("sphere", (0.13,)),
    "hat": ("cylinder", (0.15, 0.12)),
    "mirror": ("box", (0.25, 0.03, 0.35)),
    "notebook": ("box", (0.21, 0.15, 0.012)),
    "pencil": ("box", (0.18, 0.008, 0.008)),
    "plant": ("cylinder", (0.075, 0.3)),
    "plate": ("cylinder", (0.115, 0.02)),
    "radio": ("box", (0.25, 0.1, 0.14)),
    "ruler": ("box", (0.31, 0.035, 0.004)),
    "saucepan": ("cylinder", (0.1, 0.09)),
    "spoon": ("box", (0.17, 0.03, 0.012)),
    "tea pot": ("cylinder", (0.085, 0.14)),
    "toaster": ("box", (0.28, 0.17, 0.18)),
    "vase": ("cylinder", (0.06, 0.22)),
    "vegetables": ("sphere", (0.035,)),
}

# table category -> (top_w, top_d, height, arc_deg)
TABLE_SHAPES: dict[str, tuple] = {
    "dining_table": (1.6, 0.9, 0.75, (-180.0, 180.0)),
    "coffee_table": (1.0, 0.6, 0.45, (-180.0, 180.0)),
    "desk": (1.4, 0.7, 0.74, (-170.0, -10.0)),          # against the +y wall
    "kitchen_counter": (1.8, 0.62, 0.9, (-160.0, -20.0)),
    "bathroom_vanity": (0.9, 0.5, 0.85, (-150.0, -30.0)),
}


def make_object_mesh(category: str, size_scale: float = 1.0) -> TriMesh:
    """Canonical-frame prototype mesh for one tabletop category."""
    shape, dims = OBJECT_SHAPES[category]
    if shape == "box":
        return box_mesh(*(d * size_scale for d in dims))
    if shape == "cylinder":
        return cylinder_mesh(dims[0] * size_scale, dims[1] * size_scale)
    return sphere_on_ground(dims[0] * size_scale)


def nominal_size(category: str) -> float:
    shape, dims = OBJECT_SHAPES[category]
    if shape == "sphere":
        return 2 * dims[0]
    if shape == "cylinder":
        return max(2 * dims[0], dims[1])
    return max(dims)


def make_room_mesh(extent: float = 6.0, wall_side: str | None = None,
                   furniture: bool = True) -> TriMesh:
    """Floor + walls + optional labeled furniture around the origin.

    ``wall_side`` 'y+' adds a wall along the +y room boundary (the table is
    "against" that side; its catalog arc should exclude those azimuths).
    The extent leaves sampled camera poses inside the room.
    """
    half = extent / 2
    parts = []
    part_labels = []
    floor = grid_plane(-half, half, -half, half, 0.0, 6, 6)
    parts.append(floor)
    part_labels.append(FURNITURE_IDS["floor"])
    wall_h = 2.4
    wall_t = 0.05
    wall_specs = [((-half, half - wall_t), (half, half), "y+"),
                  ((-half, -half), (half, -half + wall_t), "y-")]
    for (x0, y0), (x1, y1), side in wall_specs:
        if wall_side is None and side == "y+":
            continue  # open table: keep a single far wall only
        wall = box_from_bounds((x0, y0, 0.0), (x1, y1, wall_h))
        parts.append(wall)
        part_labels.append(FURNITURE_IDS["wall"])
    if furniture:
        chair = box_from_bounds((-half + 0.4, -0.3, 0.0), (-half + 0.85, 0.15, 0.9))
        parts.append(chair)
        part_labels.append(FURNITURE_IDS["chair"])
        shelf = box_from_bounds((half - 0.7, -half + 0.2, 0.0), (half - 0.3, -half + 0.5, 1.8))
        parts.append(shelf)
        part_labels.append(FURNITURE_IDS["bookshelf"])
    labeled = []
    for mesh, sid in zip(parts, part_labels):
        lab = np.zeros((mesh.n_vertices, 2), dtype=np.int32)
        lab[:, 0] = sid
        lab[:, 1] = -1
        labeled.append(TriMesh(mesh.vertices, mesh.faces, lab))
    return merge_meshes(labeled)


def build_demo_catalog(root, seed: int = 0, assets_per_category: int = 1) -> AssetCatalog:
    """Write synthetic meshes + manifest under ``root`` and return the catalog."""
    root = Path(root)
    (root / "objects").mkdir(parents=True, exist_ok=True)
    (root / "tables").mkdir(parents=True, exist_ok=True)
    (root / "rooms").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    objects = []
    for category in TABLETOP_CLASSES:
        slug = category.replace(" ", "_")
        for k in range(assets_per_category):
            scale = 1.0 if k == 0 else float(rng.uniform(0.85, 1.15))
            mesh = make_object_mesh(category, scale)
            rel = f"objects/{slug}_{k:02d}.ply"
            save_mesh(mesh, root / rel)
            objects.append(CatalogObject(id=f"{slug}_{k:02d}", category=category,
                                         path=rel, size=nominal_size(category) * scale))

    tables = []
    for category, (w, d, h, arc) in TABLE_SHAPES.items():
        mesh = table_mesh(w, d, h)
        rel = f"tables/{category}_01.ply"
        save_mesh(mesh, root / rel)
        against_wall = arc != (-180.0, 180.0)
        room = make_room_mesh(wall_side="y+" if against_wall else None)
        room_rel = f"rooms/room_{category}_01.ply"
        save_mesh(room, root / room_rel)
        tables.append(CatalogTable(id=f"{category}_01", category=category,
                                   room=room_rel, path=rel, arc_deg=arc))

    cat = AssetCatalog(objects, tables,
                       {k: tuple(v) for k, v in DEFAULT_COMPATIBILITY.items()},
                       root=root)
    save_catalog(cat, root / "catalog.json")
    return cat
