"""TSDF integration of depth frames and marching-cubes surface extraction."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numba import njit, prange

from . import constants
from ._mc_tables import EDGE_TABLE, TRI_TABLE
from .catalog import AssetCatalog
from .errors import EmptyVolumeError, ValidationError
from .geometry import TriMesh
from .placement import MaterializedScene, SceneConfig, materialize
from .raycast import RaycastScene
from .scansim import (
    DEFAULT_INTRINSICS,
    CameraIntrinsics,
    DepthFrame,
    add_sensor_noise,
    render_depth,
    sample_poses,
    select_fusion_frames,
)

# (base-point offset, axis) for the 12 cell edges in table order
_EDGE_ANCHOR = np.array([
    [0, 0, 0, 0], [1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 0, 1],
    [0, 0, 1, 0], [1, 0, 1, 1], [0, 1, 1, 0], [0, 0, 1, 1],
    [0, 0, 0, 2], [1, 0, 0, 2], [1, 1, 0, 2], [0, 1, 0, 2],
], dtype=np.int64)

_RAW_MAGIC = b"TSDFVOL1"


@njit(cache=True, parallel=True)
def _integrate_kernel(tsdf, weight, depth, fx, fy, cx, cy, width, height,
                      rot_cw, cam_pos, ox, oy, oz, vs, trunc):
    nx, ny, nz = tsdf.shape
    for i in prange(nx):
        px = ox + i * vs
        for j in range(ny):
            py = oy + j * vs
            for k in range(nz):
                pz = oz + k * vs
                rx = px - cam_pos[0]
                ry = py - cam_pos[1]
                rz = pz - cam_pos[2]
                cz = rot_cw[2, 0] * rx + rot_cw[2, 1] * ry + rot_cw[2, 2] * rz
                if cz <= 0.0:
                    continue
                cxv = rot_cw[0, 0] * rx + rot_cw[0, 1] * ry + rot_cw[0, 2] * rz
                cyv = rot_cw[1, 0] * rx + rot_cw[1, 1] * ry + rot_cw[1, 2] * rz
                u = int(np.floor(cxv / cz * fx + cx + 0.5))
                if u < 0 or u >= width:
                    continue
                v = int(np.floor(cyv / cz * fy + cy + 0.5))
                if v < 0 or v >= height:
                    continue
                meas = depth[v, u]
                if meas <= 0.0:
                    continue
                sdf = meas - cz
                if sdf < -trunc:
                    continue
                d = sdf / trunc
                if d > 1.0:
                    d = 1.0
                w = weight[i, j, k]
                tsdf[i, j, k] = (w * tsdf[i, j, k] + d) / (w + 1.0)
                weight[i, j, k] = w + 1.0


class TsdfVolume:
    """Regular grid of truncated signed distances (normalized to [-1, 1])
    with per-sample integration weights.

    Grid point (i, j, k) sits at ``origin + voxel_size * (i, j, k)``; the
    running average keeps integration order-invariant up to float rounding.
    """

    def __init__(self, origin, voxel_size: float, dims, truncation: Optional[float] = None):
        if voxel_size <= 0:
            raise ValidationError("voxel_size must be positive")
        self.origin = np.asarray(origin, dtype=np.float64).reshape(3)
        self.voxel_size = float(voxel_size)
        self.dims = tuple(int(d) for d in dims)
        if any(d < 2 for d in self.dims):
            raise ValidationError("volume needs at least 2 samples per axis")
        self.truncation = float(truncation) if truncation is not None \
            else constants.TSDF_TRUNC_FACTOR * self.voxel_size
        if self.truncation < self.voxel_size:
            raise ValidationError("truncation must be >= voxel_size")
        self.tsdf = np.ones(self.dims, dtype=np.float64)
        self.weight = np.zeros(self.dims, dtype=np.float64)

    @classmethod
    def for_aabb(cls, bmin, bmax, voxel_size: float = constants.TSDF_VOXEL_DEFAULT,
                 truncation: Optional[float] = None,
                 pad_factor: float = constants.TSDF_PAD_FACTOR) -> "TsdfVolume":
        """Volume fitted to an AABB, padded by ``pad_factor`` truncations."""
        trunc = float(truncation) if truncation is not None \
            else constants.TSDF_TRUNC_FACTOR * voxel_size
        pad = pad_factor * trunc
        bmin = np.asarray(bmin, dtype=np.float64) - pad
        bmax = np.asarray(bmax, dtype=np.float64) + pad
        dims = np.maximum(np.ceil((bmax - bmin) / voxel_size).astype(int) + 1, 2)
        return cls(origin=bmin, voxel_size=voxel_size, dims=dims, truncation=trunc)

    @property
    def n_voxels(self) -> int:
        return int(np.prod(self.dims))

    def integrate(self, frame: DepthFrame) -> "TsdfVolume":
        """Fuse one depth frame: voxels projecting to a valid pixel get a
        running average of the clamped signed distance along the view ray."""
        intr = frame.intrinsics
        rot_cw = np.ascontiguousarray(frame.pose.rotation.T)  # camera <- world
        _integrate_kernel(
            self.tsdf, self.weight, frame.depth,
            intr.fx, intr.fy, intr.cx, intr.cy, intr.width, intr.height,
            rot_cw, frame.pose.position,
            self.origin[0], self.origin[1], self.origin[2],
            self.voxel_size, self.truncation)
        return self

    def extract_mesh(self) -> TriMesh:
        """Marching cubes over the zero level set; only cells whose 8 corners
        were all observed (weight > 0) are triangulated."""
        d = self.tsdf
        observed = self.weight > 0
        inside = (d < 0) & observed

        def corner(a, c):
            sx = slice(1, None) if c[0] else slice(None, -1)
            sy = slice(1, None) if c[1] else slice(None, -1)
            sz = slice(1, None) if c[2] else slice(None, -1)
            return a[sx, sy, sz]

        corners = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
                   (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]
        cube_idx = np.zeros(tuple(s - 1 for s in self.dims), dtype=np.uint8)
        valid = np.ones_like(cube_idx, dtype=bool)
        for bit, c in enumerate(corners):
            cube_idx |= corner(inside, c).astype(np.uint8) << bit
            valid &= corner(observed, c)

        active = valid & (EDGE_TABLE[cube_idx] != 0)
        ci, cj, ck = np.nonzero(active)
        if len(ci) == 0:
            raise EmptyVolumeError("no observed zero-crossing in the volume")

        rows = TRI_TABLE[cube_idx[ci, cj, ck]]          # (A, 16)
        entry_mask = rows >= 0
        edges = rows[entry_mask].astype(np.int64)       # per-cell consecutive
        per_cell = entry_mask.sum(axis=1)
        cell_of = np.repeat(np.arange(len(ci)), per_cell)

        anchor = _EDGE_ANCHOR[edges]
        bi = ci[cell_of] + anchor[:, 0]
        bj = cj[cell_of] + anchor[:, 1]
        bk = ck[cell_of] + anchor[:, 2]
        axis = anchor[:, 3]
        ny, nz = self.dims[1], self.dims[2]
        keys = ((bi * ny + bj) * nz + bk) * 3 + axis

        uniq, inverse = np.unique(keys, return_inverse=True)
        faces = inverse.reshape(-1, 3)[:, [0, 2, 1]]    # consistent outward winding

        u_axis = uniq % 3
        rest = uniq // 3
        uk = rest % nz
        rest = rest // nz
        uj = rest % ny
        ui = rest // ny
        d0 = d[ui, uj, uk]
        step = np.eye(3, dtype=np.int64)[u_axis]
        d1 = d[ui + step[:, 0], uj + step[:, 1], uk + step[:, 2]]
        t = d0 / (d0 - d1)
        base = np.column_stack([ui, uj, uk]).astype(np.float64)
        verts = self.origin + self.voxel_size * (base + t[:, None] * step)
        return TriMesh(verts, faces.astype(np.int32))

    def save_raw(self, path) -> None:
        """Binary dump: magic, JSON header length+bytes, then little-endian
        float64 tsdf and weight arrays in C order."""
        header = json.dumps({
            "origin": [float(v) for v in self.origin],
            "voxel_size": self.voxel_size,
            "dims": list(self.dims),
            "truncation": self.truncation,
        }).encode("ascii")
        with open(path, "wb") as f:
            f.write(_RAW_MAGIC)
            f.write(struct.pack("<I", len(header)))
            f.write(header)
            f.write(self.tsdf.astype("<f8").tobytes())
            f.write(self.weight.astype("<f8").tobytes())

    @classmethod
    def load_raw(cls, path) -> "TsdfVolume":
        with open(path, "rb") as f:
            if f.read(len(_RAW_MAGIC)) != _RAW_MAGIC:
                raise ValidationError(f"not a tsdf volume dump: {path}")
            (hlen,) = struct.unpack("<I", f.read(4))
            meta = json.loads(f.read(hlen).decode("ascii"))
            vol = cls(origin=meta["origin"], voxel_size=meta["voxel_size"],
                      dims=meta["dims"], truncation=meta["truncation"])
            n = vol.n_voxels
            vol.tsdf = np.frombuffer(f.read(8 * n), dtype="<f8").reshape(vol.dims).copy()
            vol.weight = np.frombuffer(f.read(8 * n), dtype="<f8").reshape(vol.dims).copy()
        return vol


@dataclass
class ReconstructionParams:
    """Knobs for the simulated-scan pipeline (defaults from the shipped config)."""

    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS
    n_poses: int = constants.POSE_BUDGET_DEFAULT
    fused_frames: int = constants.FUSED_FRAMES_TARGET
    voxel_size: float = constants.TSDF_VOXEL_DEFAULT
    trunc_factor: float = constants.TSDF_TRUNC_FACTOR
    noise: bool = True
    noise_sigma0: float = constants.NOISE_SIGMA0_DEFAULT
    noise_sigma1: float = constants.NOISE_SIGMA1_DEFAULT
    noise_quant: float = constants.NOISE_QUANT_DEFAULT
    z_max: float = constants.DEPTH_ZMAX_DEFAULT
    include_room: bool = True
    # bounded-memory guard: clamp the fused region around the table center
    max_extent_xy: float = 3.0
    max_height_above_table: float = 1.0

    def to_dict(self) -> dict:
        d = self.__dict__.copy()
        d["intrinsics"] = self.intrinsics.to_dict()
        return d


def volume_for_scene(scene: MaterializedScene,
                     params: ReconstructionParams) -> TsdfVolume:
    """Auto-fit volume: scene AABB padded by 4 truncations, clamped to a
    desk-scale region around the table so room-bearing scenes stay bounded."""
    bmin = scene.mesh.vertices.min(axis=0)
    bmax = scene.mesh.vertices.max(axis=0)
    cx, cy = scene.table_center[0], scene.table_center[1]
    half = params.max_extent_xy / 2.0
    bmin[0] = max(bmin[0], cx - half)
    bmax[0] = min(bmax[0], cx + half)
    bmin[1] = max(bmin[1], cy - half)
    bmax[1] = min(bmax[1], cy + half)
    bmax[2] = min(bmax[2], scene.table_top_z + params.max_height_above_table)
    trunc = params.trunc_factor * params.voxel_size
    return TsdfVolume.for_aabb(bmin, bmax, voxel_size=params.voxel_size,
                               truncation=trunc)


def reconstruct_scene(
    config: SceneConfig,
    catalog: AssetCatalog,
    params: Optional[ReconstructionParams] = None,
    seed: int = 0,
    frame_sink: Optional[Callable[[int, DepthFrame], None]] = None,
) -> tuple[TriMesh, MaterializedScene]:
    """Full simulated scan: sample poses, render + noise every selected
    frame, integrate, and triangulate. Deterministic per seed."""
    params = params or ReconstructionParams()
    scene = materialize(config, catalog, include_room=params.include_room)
    poses = sample_poses(scene.table_center, scene.table_diag,
                         n=params.n_poses, seed=seed, arc_deg=scene.arc_deg)
    selected = select_fusion_frames(len(poses), params.fused_frames)
    rc = RaycastScene(scene.mesh)
    volume = volume_for_scene(scene, params)
    for idx in selected:
        frame = render_depth(rc, params.intrinsics, poses[idx])
        if params.noise:
            frame = add_sensor_noise(
                frame, seed=np.random.SeedSequence([seed, int(idx)]),
                sigma0=params.noise_sigma0, sigma1=params.noise_sigma1,
                quant=params.noise_quant, z_max=params.z_max)
        if frame_sink is not None:
            frame_sink(int(idx), frame)
        volume.integrate(frame)
    return volume.extract_mesh(), scene
