"""Core mesh / rigid-transform / oriented-box math shared by every module.

Conventions: z is up, the table plane is z = const, yaw rotates about z.
The composed object rotation is yaw(z) @ pitch(y) @ roll(x), applied after
uniform scale and before translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyGeometryError

TAU = 2.0 * math.pi


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = (float(a) + math.pi) % TAU - math.pi
    if r == -math.pi:
        r = math.pi
    return r


def rotation_z(yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_y(pitch: float) -> np.ndarray:
    c, s = math.cos(pitch), math.sin(pitch)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_x(roll: float) -> np.ndarray:
    c, s = math.cos(roll), math.sin(roll)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_zyx(yaw: float, pitch: float = 0.0, roll: float = 0.0) -> np.ndarray:
    """Composed rotation yaw(z) @ pitch(y) @ roll(x)."""
    return rotation_z(yaw) @ rotation_y(pitch) @ rotation_x(roll)


@dataclass
class TriMesh:
    """Indexed triangle surface with optional per-vertex (semantic, instance) labels."""

    vertices: np.ndarray                       # (N, 3) float64, meters
    faces: np.ndarray                          # (M, 3) int32 vertex indices
    vertex_labels: Optional[np.ndarray] = None  # (N, 2) int32 or None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int32).reshape(-1, 3)
        if self.vertex_labels is not None:
            self.vertex_labels = np.asarray(self.vertex_labels, dtype=np.int32).reshape(-1, 2)
            if len(self.vertex_labels) != len(self.vertices):
                raise ValueError("vertex_labels length must match vertex count")
        if np.isnan(self.vertices).any():
            raise ValueError("mesh vertices contain NaN")
        if len(self.faces) and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise ValueError("face indices out of range")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def copy(self) -> "TriMesh":
        labels = None if self.vertex_labels is None else self.vertex_labels.copy()
        return TriMesh(self.vertices.copy(), self.faces.copy(), labels)


@dataclass
class RigidPlacementTransform:
    """Uniform scale, then yaw/pitch/roll rotation, then translation."""

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not self.scale > 0:
            raise ValueError("scale must be > 0")
        self.yaw = normalize_angle(self.yaw)
        self.pitch = normalize_angle(self.pitch)
        self.roll = normalize_angle(self.roll)

    def rotation(self) -> np.ndarray:
        return rotation_zyx(self.yaw, self.pitch, self.roll)

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return (self.scale * pts) @ self.rotation().T + self.translation

    def to_dict(self) -> dict:
        return {
            "translation": [float(v) for v in self.translation],
            "yaw": float(self.yaw),
            "pitch": float(self.pitch),
            "roll": float(self.roll),
            "scale": float(self.scale),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RigidPlacementTransform":
        return cls(
            translation=np.asarray(d["translation"], dtype=np.float64),
            yaw=float(d["yaw"]),
            pitch=float(d.get("pitch", 0.0)),
            roll=float(d.get("roll", 0.0)),
            scale=float(d["scale"]),
        )


@dataclass
class BBox3D:
    """Yaw-oriented 3D bounding box (full extents, not half)."""

    center: np.ndarray
    dims: np.ndarray
    yaw: float = 0.0
    semantic_id: int = 0
    instance_id: int = -1

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64).reshape(3)
        self.dims = np.asarray(self.dims, dtype=np.float64).reshape(3)
        if not (self.dims > 0).all():
            raise ValueError("box dims must be strictly positive")
        self.yaw = normalize_angle(self.yaw)
        self.semantic_id = int(self.semantic_id)
        self.instance_id = int(self.instance_id)

    @property
    def half_diagonal(self) -> float:
        return float(np.linalg.norm(self.dims) / 2.0)

    @property
    def volume(self) -> float:
        return float(np.prod(self.dims))

    def footprint_corners(self) -> np.ndarray:
        """BEV corners of the yaw-rotated footprint, (4, 2), CCW."""
        hx, hy = self.dims[0] / 2.0, self.dims[1] / 2.0
        local = np.array([[-hx, -hy], [hx, -hy], [hx, hy], [-hx, hy]])
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + self.center[:2]

    def corners(self) -> np.ndarray:
        """All 8 box corners in world frame, (8, 3)."""
        foot = self.footprint_corners()
        z0 = self.center[2] - self.dims[2] / 2.0
        z1 = self.center[2] + self.dims[2] / 2.0
        bottom = np.column_stack([foot, np.full(4, z0)])
        top = np.column_stack([foot, np.full(4, z1)])
        return np.vstack([bottom, top])

    def to_dict(self) -> dict:
        return {
            "center": [float(v) for v in self.center],
            "dims": [float(v) for v in self.dims],
            "yaw": float(self.yaw),
            "class": int(self.semantic_id),
            "instance": int(self.instance_id),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BBox3D":
        return cls(
            center=np.asarray(d["center"], dtype=np.float64),
            dims=np.asarray(d["dims"], dtype=np.float64),
            yaw=float(d.get("yaw", 0.0)),
            semantic_id=int(d.get("class", 0)),
            instance_id=int(d.get("instance", -1)),
        )


def apply_transform(mesh: TriMesh, t: RigidPlacementTransform) -> TriMesh:
    """Map vertices through scale -> rotation -> translation; faces untouched."""
    labels = None if mesh.vertex_labels is None else mesh.vertex_labels.copy()
    return TriMesh(t.apply_points(mesh.vertices), mesh.faces.copy(), labels)


def aabb_of(mesh: TriMesh) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise (min, max) over vertices."""
    if mesh.n_vertices == 0:
        raise EmptyGeometryError("aabb of empty mesh")
    return mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)


def merge_meshes(meshes: Sequence[TriMesh]) -> TriMesh:
    """Concatenate meshes, offsetting face indices; labels default to (0, -1)."""
    verts, faces, labels = [], [], []
    offset = 0
    any_labels = any(m.vertex_labels is not None for m in meshes)
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + offset)
        if any_labels:
            if m.vertex_labels is not None:
                labels.append(m.vertex_labels)
            else:
                fill = np.zeros((m.n_vertices, 2), dtype=np.int32)
                fill[:, 1] = -1
                labels.append(fill)
        offset += m.n_vertices
    if not verts:
        raise EmptyGeometryError("merge of zero meshes")
    return TriMesh(
        np.vstack(verts),
        np.vstack(faces) if faces else np.zeros((0, 3), np.int32),
        np.vstack(labels) if any_labels else None,
    )


def points_in_obb(points: np.ndarray, box: BBox3D) -> np.ndarray:
    """Boolean mask: which points fall inside the yaw-oriented box (boundary inclusive)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = pts - box.center
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    # rotate by -yaw into the box frame
    qx = c * d[:, 0] + s * d[:, 1]
    qy = -s * d[:, 0] + c * d[:, 1]
    qz = d[:, 2]
    hx, hy, hz = box.dims / 2.0
    return (np.abs(qx) <= hx) & (np.abs(qy) <= hy) & (np.abs(qz) <= hz)


def point_in_obb(p: np.ndarray, box: BBox3D) -> bool:
    """True iff p, expressed in the box frame, lies within +-dims/2 on all axes."""
    return bool(points_in_obb(np.asarray(p, dtype=np.float64).reshape(1, 3), box)[0])


def clip_polygon(subject: np.ndarray, clipper: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex subject polygon by a convex CCW clipper."""
    output = [tuple(p) for p in subject]
    n = len(clipper)
    for i in range(n):
        if not output:
            break
        a = clipper[i]
        b = clipper[(i + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]

        def inside(p):
            return ex * (p[1] - a[1]) - ey * (p[0] - a[0]) >= 0.0

        def intersect(p, q):
            dx, dy = q[0] - p[0], q[1] - p[1]
            denom = ex * dy - ey * dx
            t = (ex * (a[1] - p[1]) - ey * (a[0] - p[0])) / denom
            return (p[0] + t * dx, p[1] + t * dy)

        new_output = []
        prev = output[-1]
        prev_in = inside(prev)
        for cur in output:
            cur_in = inside(cur)
            if cur_in:
                if not prev_in:
                    new_output.append(intersect(prev, cur))
                new_output.append(cur)
            elif prev_in:
                new_output.append(intersect(prev, cur))
            prev, prev_in = cur, cur_in
        output = new_output
    return np.asarray(output, dtype=np.float64).reshape(-1, 2)


def polygon_area(poly: np.ndarray) -> float:
    """Shoelace area; positive for CCW."""
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return float(0.5 * np.abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def iou_3d(a: BBox3D, b: BBox3D) -> float:
    """3D IoU of two yaw-oriented boxes: BEV polygon overlap x vertical overlap."""
    # canonical operand order so iou(a, b) == iou(b, a) bit-for-bit
    ka = (*a.center, *a.dims, a.yaw)
    kb = (*b.center, *b.dims, b.yaw)
    if ka == kb:
        return 1.0
    if kb < ka:
        a, b = b, a
    inter_area = polygon_area(clip_polygon(a.footprint_corners(), b.footprint_corners()))
    za0, za1 = a.center[2] - a.dims[2] / 2, a.center[2] + a.dims[2] / 2
    zb0, zb1 = b.center[2] - b.dims[2] / 2, b.center[2] + b.dims[2] / 2
    overlap_z = max(0.0, min(za1, zb1) - max(za0, zb0))
    inter = inter_area * overlap_z
    union = a.volume + b.volume - inter
    if union <= 0:
        return 0.0
    return float(min(1.0, max(0.0, inter / union)))
