import math

import numpy as np
import pytest

from tablesim.errors import EmptyGeometryError
from tablesim.geometry import (
    BBox3D,
    RigidPlacementTransform,
    TriMesh,
    aabb_of,
    apply_transform,
    iou_3d,
    point_in_obb,
    points_in_obb,
    rotation_zyx,
)
from tablesim.primitives import box_mesh


def random_mesh(rng, n=40):
    verts = rng.uniform(-1, 1, size=(n, 3))
    faces = rng.integers(0, n, size=(2 * n, 3))
    return TriMesh(verts, faces)


# ---------------------------------------------------------------- transforms


def test_identity_transform_is_noop(rng):
    mesh = random_mesh(rng)
    out = apply_transform(mesh, RigidPlacementTransform())
    np.testing.assert_array_equal(out.vertices, mesh.vertices)
    np.testing.assert_array_equal(out.faces, mesh.faces)


def test_scale_doubles_aabb():
    cube = box_mesh(1, 1, 1)
    out = apply_transform(cube, RigidPlacementTransform(scale=2.0))
    bmin, bmax = aabb_of(out)
    np.testing.assert_allclose(bmax - bmin, [2.0, 2.0, 2.0])


def test_two_quarter_yaws_equal_half_turn(rng):
    mesh = random_mesh(rng)
    quarter = RigidPlacementTransform(yaw=math.pi / 2)
    half = RigidPlacementTransform(yaw=math.pi)
    twice = apply_transform(apply_transform(mesh, quarter), quarter)
    once = apply_transform(mesh, half)
    np.testing.assert_allclose(twice.vertices, once.vertices, atol=1e-9)


def test_composed_transform_matches_matrix_composition(rng):
    # applying T1 then T2 equals the single composed similarity map
    mesh = random_mesh(rng)
    t1 = RigidPlacementTransform(translation=rng.uniform(-1, 1, 3),
                                 yaw=0.7, pitch=-0.3, roll=0.2, scale=1.3)
    t2 = RigidPlacementTransform(translation=rng.uniform(-1, 1, 3),
                                 yaw=-1.1, pitch=0.4, roll=-0.8, scale=0.6)
    stepwise = apply_transform(apply_transform(mesh, t1), t2).vertices

    def homogeneous(t):
        m = np.eye(4)
        m[:3, :3] = t.rotation() * t.scale
        m[:3, 3] = t.translation
        return m

    m = homogeneous(t2) @ homogeneous(t1)
    direct = mesh.vertices @ m[:3, :3].T + m[:3, 3]
    np.testing.assert_allclose(stepwise, direct, atol=1e-9)


def test_transform_preserves_topology_and_labels(rng):
    labels = rng.integers(0, 5, size=(40, 2))
    mesh = TriMesh(rng.uniform(-1, 1, (40, 3)), rng.integers(0, 40, (30, 3)),
                   labels)
    out = apply_transform(mesh, RigidPlacementTransform(yaw=1.0, scale=2.0))
    np.testing.assert_array_equal(out.faces, mesh.faces)
    np.testing.assert_array_equal(out.vertex_labels, mesh.vertex_labels)


def test_angle_normalization():
    t = RigidPlacementTransform(yaw=3 * math.pi, pitch=-math.pi, roll=2 * math.pi)
    assert t.yaw == pytest.approx(math.pi)
    assert t.pitch == pytest.approx(math.pi)  # (-pi, pi] keeps +pi
    assert t.roll == pytest.approx(0.0)
    with pytest.raises(ValueError):
        RigidPlacementTransform(scale=0.0)


# ---------------------------------------------------------------- point in obb


def test_point_in_obb_center_and_far_point():
    box = BBox3D(center=(1, 2, 3), dims=(0.4, 0.6, 0.8), yaw=0.9)
    assert point_in_obb(box.center, box)
    far = box.center + np.array([0, 0, box.half_diagonal + 1e-6])
    assert not point_in_obb(far, box)


def test_point_in_obb_against_rotation_matrix_oracle(rng):
    box = BBox3D(center=rng.uniform(-1, 1, 3), dims=rng.uniform(0.2, 1.5, 3),
                 yaw=rng.uniform(-math.pi, math.pi))
    pts = rng.uniform(-2, 2, size=(10_000, 3))

    # independent oracle: full rotation matrix, inverse via linalg
    rot = rotation_zyx(box.yaw)
    local = (pts - box.center) @ np.linalg.inv(rot).T
    expected = (np.abs(local) <= box.dims / 2 + 1e-12).all(axis=1)

    got = points_in_obb(pts, box)
    assert (got == expected).all()


def test_point_in_obb_rigid_motion_invariance(rng):
    box = BBox3D(center=(0.2, -0.1, 0.5), dims=(0.5, 0.8, 0.3), yaw=0.4)
    pts = rng.uniform(-1, 1, size=(500, 3))
    base = points_in_obb(pts, box)

    dyaw = 1.234
    shift = np.array([0.7, -0.4, 1.1])
    rot = rotation_zyx(dyaw)
    moved_pts = pts @ rot.T + shift
    moved_box = BBox3D(center=rot @ box.center + shift, dims=box.dims,
                       yaw=box.yaw + dyaw)
    assert (points_in_obb(moved_pts, moved_box) == base).all()


# ---------------------------------------------------------------- 3d iou


def test_iou_identical_and_disjoint():
    a = BBox3D(center=(0, 0, 0), dims=(1, 1, 1), yaw=0.3)
    assert iou_3d(a, a) == 1.0
    b = BBox3D(center=(5, 5, 5), dims=(1, 1, 1), yaw=0.0)
    assert iou_3d(a, b) == 0.0


def test_iou_axis_aligned_offset_analytic():
    a = BBox3D(center=(0, 0, 0), dims=(1, 1, 1))
    b = BBox3D(center=(0.5, 0, 0), dims=(1, 1, 1))
    assert iou_3d(a, b) == pytest.approx(1.0 / 3.0, abs=1e-12)


def monte_carlo_iou(a, b, n, seed):
    rng = np.random.default_rng(seed)
    corners = np.vstack([a.corners(), b.corners()])
    lo = corners.min(axis=0)
    hi = corners.max(axis=0)
    pts = rng.uniform(lo, hi, size=(n, 3))
    in_a = points_in_obb(pts, a)
    in_b = points_in_obb(pts, b)
    inter = (in_a & in_b).sum()
    union = (in_a | in_b).sum()
    return inter / union


def test_iou_rotated_concentric_matches_monte_carlo():
    a = BBox3D(center=(0, 0, 0), dims=(1, 1, 1), yaw=0.0)
    b = BBox3D(center=(0, 0, 0), dims=(1, 1, 1), yaw=math.radians(45))
    mc = monte_carlo_iou(a, b, 1_000_000, seed=99)
    assert iou_3d(a, b) == pytest.approx(mc, abs=0.005)


def test_iou_symmetry_exact(rng):
    for _ in range(20):
        a = BBox3D(center=rng.uniform(-1, 1, 3), dims=rng.uniform(0.2, 1.5, 3),
                   yaw=rng.uniform(-math.pi, math.pi))
        b = BBox3D(center=a.center + rng.uniform(-0.5, 0.5, 3),
                   dims=rng.uniform(0.2, 1.5, 3),
                   yaw=rng.uniform(-math.pi, math.pi))
        assert iou_3d(a, b) == iou_3d(b, a)
        assert 0.0 <= iou_3d(a, b) <= 1.0


# ---------------------------------------------------------------- aabb


def test_aabb_unit_cube():
    cube = box_mesh(1, 1, 1, bottom_center=False)
    bmin, bmax = aabb_of(cube)
    np.testing.assert_array_equal(bmin, [0, 0, 0])
    np.testing.assert_array_equal(bmax, [1, 1, 1])


def test_aabb_single_vertex():
    mesh = TriMesh(np.array([[0.5, -0.25, 2.0]]), np.zeros((0, 3), dtype=np.int32))
    bmin, bmax = aabb_of(mesh)
    np.testing.assert_array_equal(bmin, bmax)


def test_aabb_contains_every_vertex(rng):
    mesh = random_mesh(rng, n=200)
    bmin, bmax = aabb_of(mesh)
    assert (mesh.vertices >= bmin).all() and (mesh.vertices <= bmax).all()


def test_aabb_empty_mesh_raises():
    empty = TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))
    with pytest.raises(EmptyGeometryError):
        aabb_of(empty)


def test_trimesh_validation():
    with pytest.raises(ValueError):
        TriMesh(np.array([[0.0, 0.0, np.nan]]), np.zeros((0, 3), dtype=np.int32))
    with pytest.raises(ValueError):
        TriMesh(np.zeros((2, 3)), np.array([[0, 1, 2]]))
