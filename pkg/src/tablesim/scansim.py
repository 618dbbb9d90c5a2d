"""Depth-camera emulation: wall-aware pose sampling around the table, z-depth
rendering, structured-light-style noise, and 16-bit PNG frame persistence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from PIL import Image

from . import constants
from .geometry import TriMesh, merge_meshes
from .raycast import RaycastScene


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point outside the image")

    def scaled(self, factor: float) -> "CameraIntrinsics":
        """Same field of view at a different resolution."""
        return CameraIntrinsics(
            fx=self.fx * factor, fy=self.fy * factor,
            cx=(self.cx + 0.5) * factor - 0.5, cy=(self.cy + 0.5) * factor - 0.5,
            width=int(round(self.width * factor)),
            height=int(round(self.height * factor)),
        )

    def to_dict(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, d: dict) -> "CameraIntrinsics":
        return cls(fx=float(d["fx"]), fy=float(d["fy"]), cx=float(d["cx"]),
                   cy=float(d["cy"]), width=int(d["width"]), height=int(d["height"]))


DEFAULT_INTRINSICS = CameraIntrinsics(**constants.INTRINSICS_DEFAULT)


@dataclass
class CameraPose:
    """world <- camera rotation and camera position in world coordinates.

    Camera frame follows the usual pinhole convention: +x right, +y down,
    +z along the optical axis.
    """

    rotation: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)
        err = np.abs(self.rotation @ self.rotation.T - np.eye(3)).max()
        if err > 1e-9:
            raise ValueError(f"rotation not orthonormal (err {err:.2e})")
        if np.linalg.det(self.rotation) < 0:
            raise ValueError("rotation must be proper (det +1)")

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.position
        return m

    @classmethod
    def from_matrix(cls, m) -> "CameraPose":
        m = np.asarray(m, dtype=np.float64).reshape(4, 4)
        return cls(rotation=m[:3, :3], position=m[:3, 3])


@dataclass
class DepthFrame:
    """Per-pixel z-depth in meters; 0 encodes an invalid/missed pixel."""

    depth: np.ndarray
    pose: CameraPose
    intrinsics: CameraIntrinsics

    def __post_init__(self):
        self.depth = np.asarray(self.depth, dtype=np.float64)
        if self.depth.shape != (self.intrinsics.height, self.intrinsics.width):
            raise ValueError("depth shape does not match intrinsics")
        if not np.isfinite(self.depth).all() or (self.depth < 0).any():
            raise ValueError("depths must be finite and non-negative")

    @property
    def valid_mask(self) -> np.ndarray:
        return self.depth > 0


def look_at_pose(position, target, up=(0.0, 0.0, 1.0)) -> CameraPose:
    """Camera at ``position`` with the optical axis through ``target``."""
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    norm = np.linalg.norm(forward)
    if norm == 0:
        raise ValueError("camera position coincides with target")
    z = forward / norm
    x = np.cross(z, np.asarray(up, dtype=np.float64))
    xn = np.linalg.norm(x)
    if xn < 1e-12:  # looking straight up/down: pick an arbitrary right
        x = np.array([1.0, 0.0, 0.0])
        xn = 1.0
    x = x / xn
    y = np.cross(z, x)
    rot = np.column_stack([x, y, z])
    return CameraPose(rotation=rot, position=position)


def sample_poses(
    target: np.ndarray,
    bev_diagonal: float,
    n: int = constants.POSE_BUDGET_DEFAULT,
    seed: int = 0,
    arc_deg: tuple[float, float] = (-180.0, 180.0),
    elevation_deg: tuple[float, float] = constants.POSE_ELEVATION_DEG,
    distance_factors: tuple[float, float] = constants.POSE_DISTANCE_FACTORS,
    jitter: float = constants.POSE_LOOKAT_JITTER,
) -> list[CameraPose]:
    """n look-at poses around the table: azimuth within the allowed arc,
    elevation and distance in their envelopes, look-at jittered."""
    if n < 1:
        raise ValueError("need n >= 1 poses")
    rng = np.random.default_rng(seed)
    target = np.asarray(target, dtype=np.float64)
    poses = []
    for _ in range(n):
        az = math.radians(rng.uniform(arc_deg[0], arc_deg[1]))
        el = math.radians(rng.uniform(elevation_deg[0], elevation_deg[1]))
        dist = rng.uniform(distance_factors[0], distance_factors[1]) * bev_diagonal
        offset = np.array([
            dist * math.cos(el) * math.cos(az),
            dist * math.cos(el) * math.sin(az),
            dist * math.sin(el),
        ])
        aim = target + rng.uniform(-jitter, jitter, size=3)
        poses.append(look_at_pose(target + offset, aim))
    return poses


def pixel_directions(intrinsics: CameraIntrinsics) -> np.ndarray:
    """Camera-frame ray directions with unit z, shape (H*W, 3), row-major."""
    us = np.arange(intrinsics.width, dtype=np.float64)
    vs = np.arange(intrinsics.height, dtype=np.float64)
    gu, gv = np.meshgrid(us, vs)  # (H, W)
    dirs = np.empty((intrinsics.height * intrinsics.width, 3))
    dirs[:, 0] = ((gu - intrinsics.cx) / intrinsics.fx).ravel()
    dirs[:, 1] = ((gv - intrinsics.cy) / intrinsics.fy).ravel()
    dirs[:, 2] = 1.0
    return dirs


def render_depth(scene: Union[TriMesh, Sequence[TriMesh], RaycastScene],
                 intrinsics: CameraIntrinsics, pose: CameraPose) -> DepthFrame:
    """Nearest-hit z-depth per pixel; misses are 0."""
    if isinstance(scene, RaycastScene):
        rc = scene
    elif isinstance(scene, TriMesh):
        rc = RaycastScene(scene)
    else:
        rc = RaycastScene(merge_meshes(list(scene)))
    dirs_cam = pixel_directions(intrinsics)
    dirs_world = dirs_cam @ pose.rotation.T
    depth = rc.cast(pose.position, dirs_world)
    return DepthFrame(depth=depth.reshape(intrinsics.height, intrinsics.width),
                      pose=pose, intrinsics=intrinsics)


def add_sensor_noise(
    frame: DepthFrame,
    seed: int = 0,
    sigma0: float = constants.NOISE_SIGMA0_DEFAULT,
    sigma1: float = constants.NOISE_SIGMA1_DEFAULT,
    quant: float = constants.NOISE_QUANT_DEFAULT,
    z_max: float = constants.DEPTH_ZMAX_DEFAULT,
) -> DepthFrame:
    """Depth-dependent Gaussian noise sigma(z) = sigma0 + sigma1 z^2, then
    quantization to ``quant`` steps; out-of-range readings invalidated."""
    rng = np.random.default_rng(seed)
    z = frame.depth
    noise = rng.standard_normal(z.shape)
    sigma = sigma0 + sigma1 * z * z
    noisy = np.where(z > 0, z + sigma * noise, 0.0)
    if quant > 0:
        noisy = np.round(noisy / quant) * quant
    noisy[(noisy <= 0) | (noisy > z_max)] = 0.0
    return DepthFrame(depth=noisy, pose=frame.pose, intrinsics=frame.intrinsics)


def backproject(frame: DepthFrame) -> np.ndarray:
    """World-frame points for all valid pixels, (N, 3)."""
    valid = frame.valid_mask
    vs, us = np.nonzero(valid)
    z = frame.depth[valid]
    intr = frame.intrinsics
    cam = np.column_stack([
        (us - intr.cx) / intr.fx * z,
        (vs - intr.cy) / intr.fy * z,
        z,
    ])
    return cam @ frame.pose.rotation.T + frame.pose.position


def project(points: np.ndarray, pose: CameraPose,
            intrinsics: CameraIntrinsics) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """World points -> (u, v, camera z). No clipping; caller masks z > 0."""
    rel = (np.asarray(points, dtype=np.float64) - pose.position) @ pose.rotation
    z = rel[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = rel[:, 0] / z * intrinsics.fx + intrinsics.cx
        v = rel[:, 1] / z * intrinsics.fy + intrinsics.cy
    return u, v, z


def select_fusion_frames(n_rendered: int,
                         target: int = constants.FUSED_FRAMES_TARGET) -> np.ndarray:
    """Every k-th frame index so roughly ``target`` frames get fused."""
    if n_rendered <= target:
        return np.arange(n_rendered)
    stride = max(1, int(round(n_rendered / target)))
    return np.arange(0, n_rendered, stride)


def save_depth_frame(frame: DepthFrame, png_path) -> None:
    """16-bit millimeter PNG plus a JSON sidecar with pose and intrinsics."""
    png_path = Path(png_path)
    mm = np.clip(np.round(frame.depth * 1000.0), 0, 65535).astype(np.uint16)
    Image.fromarray(mm).save(png_path)
    sidecar = {
        "pose": [float(v) for v in frame.pose.matrix().ravel()],  # row-major 4x4
        "intrinsics": frame.intrinsics.to_dict(),
        "depth_scale_m": 0.001,
    }
    png_path.with_suffix(".json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def load_depth_frame(png_path) -> DepthFrame:
    png_path = Path(png_path)
    mm = np.array(Image.open(png_path), dtype=np.uint16)
    sidecar = json.loads(png_path.with_suffix(".json").read_text())
    pose = CameraPose.from_matrix(np.asarray(sidecar["pose"]).reshape(4, 4))
    intr = CameraIntrinsics.from_dict(sidecar["intrinsics"])
    scale = float(sidecar.get("depth_scale_m", 0.001))
    return DepthFrame(depth=mm.astype(np.float64) * scale, pose=pose,
                      intrinsics=intr)
