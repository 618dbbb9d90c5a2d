"""Automatic labeling of reconstructed geometry from gt boxes, dataset
variant assembly, and scene-level train/test splitting.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import constants
from .catalog import AssetCatalog
from .errors import VariantMismatchError
from .fusion import ReconstructionParams, reconstruct_scene
from .geometry import BBox3D, TriMesh, points_in_obb
from .labels import BACKGROUND_ID, TABLETOP_OFFSET
from .meshio import read_ply, write_ply
from .placement import SceneConfig, materialize


@dataclass
class LabeledCloud:
    """Points with per-point semantic class (0 = background) and instance id
    (-1 = none; non-negative ids belong to tabletop instances)."""

    points: np.ndarray
    semantic: np.ndarray
    instance: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        self.semantic = np.asarray(self.semantic, dtype=np.int32).reshape(-1)
        self.instance = np.asarray(self.instance, dtype=np.int32).reshape(-1)
        if not (len(self.points) == len(self.semantic) == len(self.instance)):
            raise ValueError("points/semantic/instance lengths differ")

    def __len__(self) -> int:
        return len(self.points)


def label_points(points: np.ndarray, boxes: Sequence[BBox3D]) -> LabeledCloud:
    """Assign each point the class/instance of its containing box.

    Points inside several boxes go to the nearest box center (ties to the
    lower instance id); points in no box stay background with instance -1.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = len(pts)
    semantic = np.full(n, BACKGROUND_ID, dtype=np.int32)
    instance = np.full(n, -1, dtype=np.int32)
    best = np.full(n, np.inf)
    for box in sorted(boxes, key=lambda b: b.instance_id):
        mask = points_in_obb(pts, box)
        if not mask.any():
            continue
        dist = np.linalg.norm(pts[mask] - box.center, axis=1)
        better = dist < best[mask]
        idx = np.nonzero(mask)[0][better]
        semantic[idx] = box.semantic_id
        instance[idx] = box.instance_id
        best[idx] = dist[better]
    return LabeledCloud(points=pts, semantic=semantic, instance=instance)


def save_labeled_cloud(cloud: LabeledCloud, path) -> None:
    write_ply(path, {
        "x": cloud.points[:, 0],
        "y": cloud.points[:, 1],
        "z": cloud.points[:, 2],
        "semantic_id": cloud.semantic,
        "instance_id": cloud.instance,
    })


def load_labeled_cloud(path) -> LabeledCloud:
    props, _ = read_ply(path)
    return LabeledCloud(
        points=np.column_stack([props["x"], props["y"], props["z"]]),
        semantic=props["semantic_id"],
        instance=props["instance_id"],
    )


def save_boxes(boxes: Sequence[BBox3D], path, scores=None) -> None:
    """Gt/pred boxes as a JSON array; ``scores`` adds a per-box field."""
    items = []
    for i, b in enumerate(boxes):
        d = b.to_dict()
        if scores is not None:
            d["score"] = float(scores[i])
        items.append(d)
    Path(path).write_text(json.dumps(items, indent=2, sort_keys=True) + "\n")


def load_boxes(path) -> tuple[list[BBox3D], Optional[list[float]]]:
    items = json.loads(Path(path).read_text())
    boxes = [BBox3D.from_dict(d) for d in items]
    scores = [float(d["score"]) for d in items] if items and "score" in items[0] else None
    return boxes, scores


@dataclass
class DatasetSample:
    """One assembled scene: geometry, point labels, gt boxes, split slot."""

    scene_id: str
    variant: str
    table_id: str
    mesh: TriMesh
    cloud: LabeledCloud
    boxes: list[BBox3D]
    split: Optional[str] = None


def crop_mesh_bev(mesh: TriMesh, center_xy, radius: float) -> TriMesh:
    """Keep faces whose BEV centroid lies within ``radius`` of center."""
    tri_centroids = mesh.vertices[mesh.faces].mean(axis=1)
    d = np.hypot(tri_centroids[:, 0] - center_xy[0], tri_centroids[:, 1] - center_xy[1])
    keep = d <= radius
    faces = mesh.faces[keep]
    used = np.unique(faces)
    remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    labels = mesh.vertex_labels[used] if mesh.vertex_labels is not None else None
    return TriMesh(mesh.vertices[used], remap[faces], labels)


def _transfer_background_labels(points: np.ndarray, cloud: LabeledCloud,
                                reference: TriMesh) -> None:
    """Fill background points' semantics from the nearest furniture-labeled
    gt mesh vertex (keeps furniture classes on scanned geometry)."""
    from scipy.spatial import cKDTree

    if reference.vertex_labels is None:
        return
    furn = reference.vertex_labels[:, 0] < TABLETOP_OFFSET
    if not furn.any():
        return
    bg = cloud.semantic == BACKGROUND_ID
    if not bg.any():
        return
    tree = cKDTree(reference.vertices[furn])
    _, nearest = tree.query(points[bg], k=1)
    cloud.semantic[bg] = reference.vertex_labels[furn][nearest, 0]


def assemble_variant(config: SceneConfig, catalog: AssetCatalog, variant: str,
                     seed: int = 0, method: str = "scan",
                     params: Optional[ReconstructionParams] = None,
                     scene_id: Optional[str] = None,
                     frame_sink=None) -> DatasetSample:
    """Build one dataset sample for a variant.

    vanilla/crowd crop the room to a radius around the table (background
    furniture kept as context); whole_room keeps the full room and
    preserves furniture labels. ``method`` 'scan' runs the simulated-scan
    reconstruction; 'gt' labels the materialized geometry directly.
    """
    if config.variant != variant:
        raise VariantMismatchError(
            f"config variant '{config.variant}' != requested '{variant}'")
    lo, hi = constants.VARIANT_COUNT_RANGES[variant]
    if not lo <= len(config.placements) <= hi:
        raise VariantMismatchError(
            f"{len(config.placements)} placements outside [{lo}, {hi}] for '{variant}'")

    if method == "scan":
        mesh, scene = reconstruct_scene(config, catalog, params=params,
                                        seed=seed, frame_sink=frame_sink)
        gt_mesh = scene.mesh
    elif method == "gt":
        scene = materialize(config, catalog, include_room=True)
        mesh, gt_mesh = scene.mesh, scene.mesh
    else:
        raise ValueError(f"unknown method '{method}'")

    if variant in ("vanilla", "crowd"):
        radius = constants.CROP_RADIUS_FACTOR * scene.table_diag
        mesh = crop_mesh_bev(mesh, scene.table_center[:2], radius)

    cloud = label_points(mesh.vertices, scene.boxes)
    if variant == "whole_room":
        if method == "gt" and mesh.vertex_labels is not None:
            bg = cloud.semantic == BACKGROUND_ID
            furn = mesh.vertex_labels[:, 0] < TABLETOP_OFFSET
            take = bg & furn
            cloud.semantic[take] = mesh.vertex_labels[take, 0]
        else:
            _transfer_background_labels(mesh.vertices, cloud, gt_mesh)

    return DatasetSample(
        scene_id=scene_id or f"{config.table_id}_{config.seed:08d}",
        variant=variant,
        table_id=config.table_id,
        mesh=mesh,
        cloud=cloud,
        boxes=scene.boxes,
        split=None,
    )


def split_dataset(samples: Sequence, ratio: float, seed: int = 0):
    """Deterministic scene-level split; groups sharing a table stay together."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    items = list(samples)
    groups: dict[str, list[int]] = {}
    for i, s in enumerate(items):
        table = s.table_id if hasattr(s, "table_id") else s[1]
        groups.setdefault(str(table), []).append(i)
    keys = sorted(groups)
    rng = np.random.default_rng(seed)
    rng.shuffle(keys)
    target = ratio * len(items)
    train_idx: set[int] = set()
    assigned = 0
    for key in keys:
        if assigned < target:
            train_idx.update(groups[key])
            assigned += len(groups[key])
    train = [items[i] for i in range(len(items)) if i in train_idx]
    test = [items[i] for i in range(len(items)) if i not in train_idx]
    for s in train:
        if hasattr(s, "split"):
            s.split = "train"
    for s in test:
        if hasattr(s, "split"):
            s.split = "test"
    if not test:
        warnings.warn("test split is empty", stacklevel=2)
    return train, test
