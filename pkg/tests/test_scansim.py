import math

import numpy as np
import pytest

from tablesim import constants
from tablesim.geometry import TriMesh
from tablesim.primitives import grid_plane, uv_sphere_mesh
from tablesim.scansim import (
    CameraIntrinsics,
    CameraPose,
    DepthFrame,
    add_sensor_noise,
    backproject,
    load_depth_frame,
    pixel_directions,
    project,
    render_depth,
    sample_poses,
    save_depth_frame,
    select_fusion_frames,
)

IDENTITY_POSE = CameraPose(rotation=np.eye(3), position=np.zeros(3))


def azimuth_of(pose, target):
    rel = pose.position - target
    return math.degrees(math.atan2(rel[1], rel[0]))


# ---------------------------------------------------------------- poses


def test_pose_budget_default_within_paper_range():
    assert 50 <= constants.POSE_BUDGET_DEFAULT <= 100
    poses = sample_poses(np.zeros(3), 1.0, seed=1)
    assert len(poses) == constants.POSE_BUDGET_DEFAULT == 75


def test_poses_respect_arc():
    target = np.array([0.3, -0.2, 0.7])
    poses = sample_poses(target, 1.2, n=200, seed=3, arc_deg=(-90.0, 90.0))
    for pose in poses:
        assert -90.0 <= azimuth_of(pose, target) <= 90.0


def test_poses_full_circle_azimuth_uniform():
    poses = sample_poses(np.zeros(3), 1.0, n=10_000, seed=5,
                         arc_deg=(-180.0, 180.0))
    az = np.array([azimuth_of(p, np.zeros(3)) for p in poses])
    hist, _ = np.histogram(az, bins=10, range=(-180, 180))
    frac = hist / len(az)
    assert np.abs(frac - 0.1).max() < 0.03  # uniform within 3% absolute


def test_pose_envelope_and_determinism():
    target = np.zeros(3)
    diag = 1.5
    a = sample_poses(target, diag, n=50, seed=11)
    b = sample_poses(target, diag, n=50, seed=11)
    c = sample_poses(target, diag, n=50, seed=12)
    assert all((x.matrix() == y.matrix()).all() for x, y in zip(a, b))
    assert any((x.matrix() != y.matrix()).any() for x, y in zip(a, c))
    for pose in a:
        rel = pose.position - target
        dist = np.linalg.norm(rel)
        elev = math.degrees(math.asin(rel[2] / dist))
        assert 0.6 * diag - 1e-9 <= dist <= 1.6 * diag + 1e-9
        assert 20.0 - 1e-9 <= elev <= 60.0 + 1e-9


def test_pose_rotation_is_orthonormal_lookat():
    poses = sample_poses(np.array([1.0, 2.0, 0.5]), 0.8, n=20, seed=9)
    for pose in poses:
        r = pose.rotation
        np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------- rendering


def test_render_triangle_at_one_meter(small_intrinsics):
    tri = TriMesh(np.array([[-2.0, -2.0, 1.0], [2.0, -2.0, 1.0], [0.0, 3.0, 1.0]]),
                  np.array([[0, 1, 2]]))
    frame = render_depth(tri, small_intrinsics, IDENTITY_POSE)
    h, w = frame.depth.shape
    center = frame.depth[h // 2, w // 2]
    assert center == pytest.approx(1.0, abs=1e-6)
    valid = frame.depth[frame.depth > 0]
    np.testing.assert_allclose(valid, 1.0, atol=1e-9)  # z-depth, not ray length


def test_render_empty_scene(small_intrinsics):
    empty = TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))
    frame = render_depth(empty, small_intrinsics, IDENTITY_POSE)
    assert (frame.depth == 0).all()


def pixel_aligned_sphere_cap(intr, center, radius, half_px):
    """Mesh whose vertices are the analytic hit points of half-pixel-offset
    rays, so pixel-center rays cross triangle interiors with sub-pixel chords.

    The grid spans cx/cy +- half_px, which must stay inside the sphere's
    projected disk."""
    us = intr.cx + np.arange(-half_px - 0.5, half_px + 1.0)
    vs = intr.cy + np.arange(-half_px - 0.5, half_px + 1.0)
    gu, gv = np.meshgrid(us, vs, indexing="ij")
    dirs = np.stack([(gu - intr.cx) / intr.fx, (gv - intr.cy) / intr.fy,
                     np.ones_like(gu)], axis=-1)
    t = analytic_sphere_depth(dirs.reshape(-1, 3), center, radius)
    assert np.isfinite(t).all(), "cap grid must fully hit the sphere"
    verts = dirs.reshape(-1, 3) * t[:, None]
    nu, nv = gu.shape
    faces = []
    for i in range(nu - 1):
        for j in range(nv - 1):
            a = i * nv + j
            b = (i + 1) * nv + j
            faces.append([a, b, b + 1])
            faces.append([a, b + 1, a + 1])
    return TriMesh(verts, np.asarray(faces, dtype=np.int32))


def analytic_sphere_depth(dirs, center, radius):
    """Closed-form smallest positive ray parameter for rays from the origin
    with unit-z directions (parameter equals z-depth)."""
    dirs = np.asarray(dirs, dtype=np.float64)
    a = (dirs * dirs).sum(axis=1)
    b = -2.0 * dirs @ center
    c = center @ center - radius * radius
    disc = b * b - 4 * a * c
    t = np.full(len(dirs), np.nan)
    ok = disc >= 0
    sq = np.sqrt(disc[ok])
    t1 = (-b[ok] - sq) / (2 * a[ok])
    t2 = (-b[ok] + sq) / (2 * a[ok])
    tmin = np.where(t1 > 1e-6, t1, t2)
    t[ok] = np.where(tmin > 1e-6, tmin, np.nan)
    return t


def test_render_sphere_matches_analytic_solution(small_intrinsics):
    intr = small_intrinsics
    center = np.array([0.0, 0.0, 2.0])
    radius = 0.5
    # projected disk radius: tan(asin(r/2)) * f ~ 37.7 px; stay well inside
    cap = pixel_aligned_sphere_cap(intr, center, radius, half_px=24)
    frame = render_depth(cap, intr, IDENTITY_POSE)
    dirs = pixel_directions(intr)
    expected = analytic_sphere_depth(dirs, center, radius).reshape(
        intr.height, intr.width)
    cy, cx = int(intr.cy), int(intr.cx)
    sl = np.s_[cy - 20:cy + 21, cx - 20:cx + 21]
    got = frame.depth[sl]
    want = expected[sl]
    assert np.isfinite(want).all()
    assert (got > 0).all()
    np.testing.assert_allclose(got, want, atol=1e-5)


def brute_force_depths(mesh, intr, pose):
    """All-triangle Moller-Trumbore oracle, fully vectorized in numpy."""
    dirs = pixel_directions(intr) @ pose.rotation.T
    o = pose.position
    tri = mesh.vertices[mesh.faces]
    v0 = tri[:, 0]
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    best = np.full(len(dirs), np.inf)
    for t in range(len(v0)):
        p = np.cross(dirs, e2[t])
        det = p @ e1[t]
        ok = np.abs(det) > 1e-14
        inv = np.zeros_like(det)
        inv[ok] = 1.0 / det[ok]
        s = o - v0[t]
        u = (p @ s) * inv
        q = np.cross(s, e1[t])
        v = (dirs @ q) * inv
        th = (e2[t] @ q) * inv
        hit = ok & (u >= -1e-12) & (u <= 1 + 1e-12) & (v >= -1e-12) \
            & (u + v <= 1 + 1e-12) & (th > 1e-6)
        best = np.where(hit & (th < best), th, best)
    best[~np.isfinite(best)] = 0.0
    return best


def test_nearest_hit_matches_brute_force(rng, small_intrinsics):
    # random triangle soup in front of the camera
    base = rng.uniform([-0.8, -0.8, 1.0], [0.8, 0.8, 3.0], size=(300, 3))
    jitter = rng.uniform(-0.3, 0.3, size=(300, 2, 3))
    verts = np.concatenate([base[:, None, :], base[:, None, :] + jitter], axis=1)
    mesh = TriMesh(verts.reshape(-1, 3), np.arange(900).reshape(300, 3))
    frame = render_depth(mesh, small_intrinsics, IDENTITY_POSE)
    oracle = brute_force_depths(mesh, small_intrinsics, IDENTITY_POSE).reshape(
        frame.depth.shape)
    hit = frame.depth > 0
    assert (hit == (oracle > 0)).all()
    np.testing.assert_allclose(frame.depth[hit], oracle[hit], rtol=0, atol=1e-9)
    # nearest-hit property: rendered depth never exceeds the true nearest hit
    assert (frame.depth[hit] <= oracle[hit] + 1e-9).all()


def test_backprojection_roundtrip(small_intrinsics):
    sphere = uv_sphere_mesh(0.4, rings=16, segments=32, center=(0.1, -0.2, 2.0))
    pose = sample_poses(np.array([0.1, -0.2, 2.0]), 0.8, n=1, seed=0)[0]
    frame = render_depth(sphere, small_intrinsics, pose)
    assert frame.valid_mask.sum() > 500
    world = backproject(frame)
    u, v, z = project(world, frame.pose, frame.intrinsics)
    vs, us = np.nonzero(frame.valid_mask)
    assert np.abs(u - us).max() < 0.5
    assert np.abs(v - vs).max() < 0.5
    assert (z > 0).all()


# ---------------------------------------------------------------- noise


def test_noise_disabled_is_identity(small_intrinsics):
    depth = np.full((small_intrinsics.height, small_intrinsics.width), 1.5)
    frame = DepthFrame(depth=depth, pose=IDENTITY_POSE,
                       intrinsics=small_intrinsics)
    out = add_sensor_noise(frame, seed=1, sigma0=0.0, sigma1=0.0, quant=0.0)
    np.testing.assert_array_equal(out.depth, frame.depth)


def test_noise_std_matches_model():
    intr = CameraIntrinsics(fx=585, fy=585, cx=319.5, cy=239.5,
                            width=640, height=480)
    depth = np.ones((480, 640))
    frame = DepthFrame(depth=depth, pose=IDENTITY_POSE, intrinsics=intr)
    out = add_sensor_noise(frame, seed=2)  # defaults: sigma = 1mm + 2mm*z^2
    resid = out.depth[out.depth > 0] - 1.0
    assert abs(resid.std() - 0.003) < 0.0003  # 3mm within 10%


def test_noise_invalidates_beyond_zmax(small_intrinsics):
    depth = np.full((small_intrinsics.height, small_intrinsics.width), 6.0)
    frame = DepthFrame(depth=depth, pose=IDENTITY_POSE,
                       intrinsics=small_intrinsics)
    out = add_sensor_noise(frame, seed=3)
    assert (out.depth == 0).all()


def test_noise_deterministic(small_intrinsics):
    depth = np.full((small_intrinsics.height, small_intrinsics.width), 2.0)
    frame = DepthFrame(depth=depth, pose=IDENTITY_POSE,
                       intrinsics=small_intrinsics)
    a = add_sensor_noise(frame, seed=7)
    b = add_sensor_noise(frame, seed=7)
    c = add_sensor_noise(frame, seed=8)
    assert (a.depth == b.depth).all()
    assert (a.depth != c.depth).any()


def test_invalid_pixels_stay_invalid(small_intrinsics):
    depth = np.zeros((small_intrinsics.height, small_intrinsics.width))
    depth[10, 10] = 1.0
    frame = DepthFrame(depth=depth, pose=IDENTITY_POSE,
                       intrinsics=small_intrinsics)
    out = add_sensor_noise(frame, seed=4)
    assert out.depth[0, 0] == 0.0
    assert (out.depth > 0).sum() <= 1


# ---------------------------------------------------------------- persistence


def test_depth_frame_png_roundtrip(tmp_path, small_intrinsics):
    plane = grid_plane(-3, 3, -3, 3, 0.0, 2, 2)
    pose = sample_poses(np.zeros(3), 1.0, n=1, seed=6)[0]
    frame = render_depth(plane, small_intrinsics, pose)
    save_depth_frame(frame, tmp_path / "f.png")
    back = load_depth_frame(tmp_path / "f.png")
    assert np.abs(back.depth - frame.depth).max() <= 0.0005 + 1e-9  # mm quantization
    np.testing.assert_allclose(back.pose.matrix(), frame.pose.matrix())
    assert back.intrinsics == frame.intrinsics
    assert (tmp_path / "f.json").exists()


def test_select_fusion_frames_hits_target():
    sel = select_fusion_frames(75, target=26)
    assert 20 <= len(sel) <= 30
    assert sel[0] == 0
    sel_small = select_fusion_frames(10, target=26)
    np.testing.assert_array_equal(sel_small, np.arange(10))
