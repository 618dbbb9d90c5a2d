"""Tabletop-aware learning primitives: soft discriminator targets, the joint
loss combiner, and point samplers (FPS, grid, random, score-weighted).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from . import constants
from .errors import BadCountError, BadVoxelSizeError
from .geometry import BBox3D
from .meshio import read_ply, write_ply


@dataclass
class ScoreField:
    """Per-point tabletop-likelihood scores, clamped to [0, 1]."""

    scores: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        if not np.isfinite(s).all():
            raise ValueError("scores must be finite")
        self.scores = np.clip(s, 0.0, 1.0)

    def __len__(self) -> int:
        return len(self.scores)


@dataclass
class LossTerms:
    """Main-task loss, discriminator loss, and the mixing weight."""

    l_main: float
    l_dis: float
    lam: float = constants.LAMBDA_DEFAULT

    def __post_init__(self):
        for name in ("l_main", "l_dis", "lam"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative")
            setattr(self, name, v)


def joint_loss(t: LossTerms) -> float:
    """Total training loss: main term plus weighted discriminator term."""
    return t.l_main + t.lam * t.l_dis


def soft_gt(points: np.ndarray, tabletop_boxes: Sequence[BBox3D]) -> ScoreField:
    """Soft per-point target: 1 at a box center falling to 0 at distance
    equal to the box half-diagonal; max over boxes, zero without boxes."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    scores = np.zeros(len(pts))
    for box in tabletop_boxes:
        r = box.half_diagonal
        d = np.linalg.norm(pts - box.center, axis=1)
        np.maximum(scores, 1.0 - d / r, out=scores)
    return ScoreField(np.clip(scores, 0.0, 1.0))


def discriminator_bce(pred: np.ndarray, target: np.ndarray,
                      eps: float = 1e-7) -> float:
    """Binary cross-entropy against 0/1 tabletop membership (segmentation gt)."""
    p = np.clip(np.asarray(pred, dtype=np.float64), eps, 1.0 - eps)
    y = np.asarray(target, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def discriminator_mse(pred: np.ndarray, soft_target: np.ndarray) -> float:
    """Mean squared error against the soft center-distance target (detection gt)."""
    p = np.asarray(pred, dtype=np.float64)
    s = np.asarray(soft_target, dtype=np.float64)
    return float(np.mean((p - s) ** 2))


def _check_count(n: int, m: int) -> None:
    if not 1 <= m <= n:
        raise BadCountError(f"sample count {m} outside [1, {n}]")


@njit(cache=True)
def _fps_kernel(points, m, start):
    n = points.shape[0]
    out = np.empty(m, dtype=np.int64)
    dist = np.full(n, np.inf)
    cur = start
    for it in range(m):
        out[it] = cur
        best = -1.0
        nxt = cur
        for i in range(n):
            dx = points[i, 0] - points[cur, 0]
            dy = points[i, 1] - points[cur, 1]
            dz = points[i, 2] - points[cur, 2]
            d = dx * dx + dy * dy + dz * dz
            if d < dist[i]:
                dist[i] = d
            if dist[i] > best:
                best = dist[i]
                nxt = i
        cur = nxt
    return out


def fps(points: np.ndarray, m: int, seed: int = 0) -> np.ndarray:
    """Farthest point sampling: greedy max-min from a seeded start index."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 3))
    _check_count(len(pts), m)
    rng = np.random.default_rng(seed)
    start = int(rng.integers(len(pts)))
    return _fps_kernel(pts, m, start)


def grid_sample(points: np.ndarray,
                voxel_size: float = constants.GRID_VOXEL_DEFAULT) -> np.ndarray:
    """One representative per occupied voxel: the point nearest the voxel
    center, ties to the lowest index. Returns ascending indices."""
    if not voxel_size > 0:
        raise BadVoxelSizeError(f"voxel_size {voxel_size} must be positive")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(pts) == 0:
        return np.zeros(0, dtype=np.int64)
    pmin = pts.min(axis=0)
    cell = np.floor((pts - pmin) / voxel_size).astype(np.int64)
    extent = cell.max(axis=0) + 1
    key = (cell[:, 0] * extent[1] + cell[:, 1]) * extent[2] + cell[:, 2]
    centers = pmin + (cell + 0.5) * voxel_size
    d2 = ((pts - centers) ** 2).sum(axis=1)
    order = np.lexsort((np.arange(len(pts)), d2, key))
    sorted_keys = key[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = sorted_keys[1:] != sorted_keys[:-1]
    return np.sort(order[first])


def random_sample(points: np.ndarray, m: int, seed: int = 0) -> np.ndarray:
    """m distinct uniform indices, deterministic per seed."""
    pts = np.asarray(points)
    n = len(pts)
    _check_count(n, m)
    rng = np.random.default_rng(seed)
    return rng.choice(n, size=m, replace=False)


def dynamic_sample(points: np.ndarray, scores, m: int,
                   alpha: float = constants.ALPHA_DEFAULT,
                   seed: int = 0) -> np.ndarray:
    """Score-weighted sampling without replacement via exponential keys.

    Per-point weight w_i = (1-alpha)/N + alpha * s_i / sum(s); zero total
    score falls back to uniform. Returned indices are in draw order, so the
    first entry is the top exponential-key draw.
    """
    pts = np.asarray(points)
    n = len(pts)
    _check_count(n, m)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be within [0, 1]")
    s = scores.scores if isinstance(scores, ScoreField) else \
        np.clip(np.asarray(scores, dtype=np.float64).reshape(-1), 0.0, 1.0)
    if len(s) != n:
        raise BadCountError(f"{len(s)} scores for {n} points")
    total = s.sum()
    if total > 0:
        w = (1.0 - alpha) / n + alpha * s / total
    else:
        w = np.full(n, 1.0 / n)
    rng = np.random.default_rng(seed)
    with np.errstate(divide="ignore"):
        # alpha = 1 zero-score points get weight 0 -> infinite key, drawn last
        keys = rng.exponential(1.0, size=n) / w
    return np.argsort(keys, kind="stable")[:m]


def density_report(cloud, indices: np.ndarray) -> dict[int, float]:
    """Per-semantic-class retained fraction |sampled ∩ class| / |class|.

    Classes with no points in the cloud simply do not appear.
    """
    semantic = np.asarray(cloud.semantic if hasattr(cloud, "semantic") else cloud)
    idx = np.asarray(indices, dtype=np.int64)
    if len(idx) and (idx.min() < 0 or idx.max() >= len(semantic)):
        raise IndexError("sample indices out of range")
    report = {}
    sampled = semantic[idx]
    for cls in np.unique(semantic):
        total = int((semantic == cls).sum())
        kept = int((sampled == cls).sum())
        report[int(cls)] = kept / total
    return report


def save_score_cloud(points: np.ndarray, scores: ScoreField, path) -> None:
    """Persist points with a per-vertex float ``score`` property."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    write_ply(path, {
        "x": pts[:, 0], "y": pts[:, 1], "z": pts[:, 2],
        "score": scores.scores.astype(np.float32),
    })


def load_score_cloud(path) -> tuple[np.ndarray, ScoreField]:
    props, _ = read_ply(path)
    pts = np.column_stack([props["x"], props["y"], props["z"]])
    return pts, ScoreField(np.asarray(props["score"], dtype=np.float64))
