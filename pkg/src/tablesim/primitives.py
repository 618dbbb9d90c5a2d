"""Parametric meshes used by the synthetic catalog, demos, and tests.

Object primitives follow the canonical asset frame: bottom face at z = 0,
centered in x/y.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import TriMesh, merge_meshes


def box_mesh(sx: float, sy: float, sz: float, bottom_center=True) -> TriMesh:
    """Axis-aligned box; bottom at z=0 and centered in x/y unless disabled."""
    if bottom_center:
        x0, x1 = -sx / 2, sx / 2
        y0, y1 = -sy / 2, sy / 2
        z0, z1 = 0.0, sz
    else:
        x0, y0, z0 = 0.0, 0.0, 0.0
        x1, y1, z1 = sx, sy, sz
    return box_from_bounds((x0, y0, z0), (x1, y1, z1))


def box_from_bounds(bmin, bmax) -> TriMesh:
    x0, y0, z0 = bmin
    x1, y1, z1 = bmax
    v = np.array([
        [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
        [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
    ])
    f = np.array([
        [0, 2, 1], [0, 3, 2],          # bottom (normal -z)
        [4, 5, 6], [4, 6, 7],          # top (+z)
        [0, 1, 5], [0, 5, 4],          # -y side
        [2, 3, 7], [2, 7, 6],          # +y side
        [1, 2, 6], [1, 6, 5],          # +x side
        [3, 0, 4], [3, 4, 7],          # -x side
    ], dtype=np.int32)
    return TriMesh(v, f)


def cylinder_mesh(radius: float, height: float, segments: int = 24) -> TriMesh:
    """Closed cylinder standing on z=0, centered in x/y."""
    ang = np.linspace(0.0, 2 * math.pi, segments, endpoint=False)
    ring = np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])
    bottom = np.column_stack([ring, np.zeros(segments)])
    top = np.column_stack([ring, np.full(segments, height)])
    verts = np.vstack([bottom, top, [[0.0, 0.0, 0.0]], [[0.0, 0.0, height]]])
    cb, ct = 2 * segments, 2 * segments + 1
    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces.append([i, j, segments + j])
        faces.append([i, segments + j, segments + i])
        faces.append([cb, j, i])                        # bottom cap
        faces.append([ct, segments + i, segments + j])  # top cap
    return TriMesh(verts, np.asarray(faces, dtype=np.int32))


def uv_sphere_mesh(radius: float, rings: int = 12, segments: int = 24,
                   center=(0.0, 0.0, 0.0)) -> TriMesh:
    """UV-tessellated sphere around ``center``."""
    cx, cy, cz = center
    verts = [(cx, cy, cz + radius)]
    for r in range(1, rings):
        phi = math.pi * r / rings
        for s in range(segments):
            th = 2 * math.pi * s / segments
            verts.append((cx + radius * math.sin(phi) * math.cos(th),
                          cy + radius * math.sin(phi) * math.sin(th),
                          cz + radius * math.cos(phi)))
    verts.append((cx, cy, cz - radius))
    top, bot = 0, len(verts) - 1
    idx = lambda r, s: 1 + (r - 1) * segments + (s % segments)
    faces = []
    for s in range(segments):
        faces.append([top, idx(1, s), idx(1, s + 1)])
        faces.append([bot, idx(rings - 1, s + 1), idx(rings - 1, s)])
    for r in range(1, rings - 1):
        for s in range(segments):
            a, b = idx(r, s), idx(r, s + 1)
            c, d = idx(r + 1, s), idx(r + 1, s + 1)
            faces.append([a, c, d])
            faces.append([a, d, b])
    return TriMesh(np.asarray(verts), np.asarray(faces, dtype=np.int32))


def sphere_on_ground(radius: float, rings: int = 12, segments: int = 24) -> TriMesh:
    return uv_sphere_mesh(radius, rings, segments, center=(0.0, 0.0, radius))


def grid_plane(x0, x1, y0, y1, z, nx: int = 1, ny: int = 1) -> TriMesh:
    """Subdivided rectangle in the z=const plane (normals +z)."""
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, float(z))])
    faces = []
    for i in range(nx):
        for j in range(ny):
            a = i * (ny + 1) + j
            b = (i + 1) * (ny + 1) + j
            faces.append([a, b, b + 1])
            faces.append([a, b + 1, a + 1])
    return TriMesh(verts, np.asarray(faces, dtype=np.int32))


def table_mesh(top_w: float, top_d: float, height: float,
               top_thickness: float = 0.04, leg: float = 0.05) -> TriMesh:
    """Four-leg table centered at the origin, flat top surface at z = height."""
    top = box_from_bounds((-top_w / 2, -top_d / 2, height - top_thickness),
                          (top_w / 2, top_d / 2, height))
    legs = []
    inset = leg * 1.2
    for sx in (-1, 1):
        for sy in (-1, 1):
            cx = sx * (top_w / 2 - inset)
            cy = sy * (top_d / 2 - inset)
            legs.append(box_from_bounds((cx - leg / 2, cy - leg / 2, 0.0),
                                        (cx + leg / 2, cy + leg / 2, height - top_thickness)))
    return merge_meshes([top] + legs)


def bumpy_table_mesh(top_w: float, top_d: float, height: float,
                     bump_height: float = 0.02, bump_size: float = 0.1,
                     bump_center=(0.0, 0.0)) -> TriMesh:
    """Flat table with a raised plateau patch on the top (exercises height calibration)."""
    base = table_mesh(top_w, top_d, height)
    bx, by = bump_center
    bump = box_from_bounds((bx - bump_size / 2, by - bump_size / 2, height),
                           (bx + bump_size / 2, by + bump_size / 2, height + bump_height))
    return merge_meshes([base, bump])
