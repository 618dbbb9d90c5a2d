"""Triangle-mesh ray casting: BVH build in numpy, traversal JIT-compiled.

The public contract is nearest-hit correctness; the acceleration structure
is internal. Ray directions are expected with unit z in the camera frame so
the ray parameter of a hit equals its z-depth.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from .geometry import TriMesh

_LEAF_SIZE = 4


def build_bvh(triangles: np.ndarray):
    """Median-split BVH over (M, 3, 3) triangles; returns flat node arrays."""
    m = len(triangles)
    centroids = triangles.mean(axis=1)
    tmin = triangles.min(axis=1)
    tmax = triangles.max(axis=1)
    max_nodes = max(1, 2 * m)
    node_min = np.empty((max_nodes, 3))
    node_max = np.empty((max_nodes, 3))
    node_left = np.full(max_nodes, -1, dtype=np.int64)
    node_right = np.full(max_nodes, -1, dtype=np.int64)
    node_start = np.full(max_nodes, -1, dtype=np.int64)
    node_count = np.zeros(max_nodes, dtype=np.int64)
    order = np.arange(m, dtype=np.int64)

    n_nodes = 1
    stack = [(0, 0, m)]
    while stack:
        node, lo, hi = stack.pop()
        idx = order[lo:hi]
        node_min[node] = tmin[idx].min(axis=0)
        node_max[node] = tmax[idx].max(axis=0)
        if hi - lo <= _LEAF_SIZE:
            node_start[node] = lo
            node_count[node] = hi - lo
            continue
        cents = centroids[idx]
        axis = int(np.argmax(cents.max(axis=0) - cents.min(axis=0)))
        mid = (hi - lo) // 2
        part = np.argpartition(cents[:, axis], mid)
        order[lo:hi] = idx[part]
        left, right = n_nodes, n_nodes + 1
        n_nodes += 2
        node_left[node] = left
        node_right[node] = right
        stack.append((left, lo, lo + mid))
        stack.append((right, lo + mid, hi))

    return (node_min[:n_nodes], node_max[:n_nodes], node_left[:n_nodes],
            node_right[:n_nodes], node_start[:n_nodes], node_count[:n_nodes],
            order)


@njit(cache=True)
def _ray_nearest(o, d, node_min, node_max, left, right, start, count, order,
                 v0, e1, e2, t_eps):
    best = np.inf
    invx = 1.0 / d[0] if d[0] != 0.0 else np.inf
    invy = 1.0 / d[1] if d[1] != 0.0 else np.inf
    invz = 1.0 / d[2] if d[2] != 0.0 else np.inf
    stack = np.empty(128, dtype=np.int64)
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        # slab test against [t_eps, best]
        tx1 = (node_min[node, 0] - o[0]) * invx
        tx2 = (node_max[node, 0] - o[0]) * invx
        tlo = min(tx1, tx2)
        thi = max(tx1, tx2)
        ty1 = (node_min[node, 1] - o[1]) * invy
        ty2 = (node_max[node, 1] - o[1]) * invy
        tlo = max(tlo, min(ty1, ty2))
        thi = min(thi, max(ty1, ty2))
        tz1 = (node_min[node, 2] - o[2]) * invz
        tz2 = (node_max[node, 2] - o[2]) * invz
        tlo = max(tlo, min(tz1, tz2))
        thi = min(thi, max(tz1, tz2))
        if thi < tlo or thi < t_eps or tlo > best:
            continue
        if count[node] > 0:
            for k in range(start[node], start[node] + count[node]):
                t = order[k]
                # Moller-Trumbore, double sided
                px = d[1] * e2[t, 2] - d[2] * e2[t, 1]
                py = d[2] * e2[t, 0] - d[0] * e2[t, 2]
                pz = d[0] * e2[t, 1] - d[1] * e2[t, 0]
                det = e1[t, 0] * px + e1[t, 1] * py + e1[t, 2] * pz
                if det > -1e-14 and det < 1e-14:
                    continue
                inv_det = 1.0 / det
                sx = o[0] - v0[t, 0]
                sy = o[1] - v0[t, 1]
                sz = o[2] - v0[t, 2]
                u = (sx * px + sy * py + sz * pz) * inv_det
                if u < -1e-12 or u > 1.0 + 1e-12:
                    continue
                qx = sy * e1[t, 2] - sz * e1[t, 1]
                qy = sz * e1[t, 0] - sx * e1[t, 2]
                qz = sx * e1[t, 1] - sy * e1[t, 0]
                v = (d[0] * qx + d[1] * qy + d[2] * qz) * inv_det
                if v < -1e-12 or u + v > 1.0 + 1e-12:
                    continue
                t_hit = (e2[t, 0] * qx + e2[t, 1] * qy + e2[t, 2] * qz) * inv_det
                if t_hit > t_eps and t_hit < best:
                    best = t_hit
        else:
            stack[sp] = left[node]
            sp += 1
            stack[sp] = right[node]
            sp += 1
    return best


@njit(cache=True, parallel=True)
def _render(origin, dirs, node_min, node_max, left, right, start, count,
            order, v0, e1, e2, t_eps, out):
    n = dirs.shape[0]
    for i in prange(n):
        t = _ray_nearest(origin, dirs[i], node_min, node_max, left, right,
                         start, count, order, v0, e1, e2, t_eps)
        out[i] = t if np.isfinite(t) else 0.0


class RaycastScene:
    """Prebuilt acceleration structure for repeated renders of one scene."""

    def __init__(self, mesh: TriMesh, t_eps: float = 1e-6):
        tris = mesh.vertices[mesh.faces]
        if len(tris) == 0:
            self._empty = True
            return
        self._empty = False
        self.t_eps = t_eps
        (self.node_min, self.node_max, self.left, self.right,
         self.start, self.count, self.order) = build_bvh(tris)
        self.v0 = np.ascontiguousarray(tris[:, 0])
        self.e1 = np.ascontiguousarray(tris[:, 1] - tris[:, 0])
        self.e2 = np.ascontiguousarray(tris[:, 2] - tris[:, 0])

    def cast(self, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Nearest-hit ray parameter per direction; 0 where the ray misses."""
        dirs = np.ascontiguousarray(dirs, dtype=np.float64)
        out = np.zeros(len(dirs))
        if self._empty:
            return out
        _render(np.ascontiguousarray(origin, dtype=np.float64), dirs,
                self.node_min, self.node_max, self.left, self.right,
                self.start, self.count, self.order,
                self.v0, self.e1, self.e2, self.t_eps, out)
        return out
