import numpy as np
import pytest

from tablesim.catalog import AssetCatalog, CatalogObject, CatalogTable
from tablesim.errors import (
    CollisionError,
    IncompatibleCategoryError,
    OffTableError,
    PlacementExhaustedError,
)
from tablesim.geometry import points_in_obb
from tablesim.meshio import save_mesh
from tablesim.placement import (
    Placement,
    SceneConfig,
    calibrate_height,
    check_collision,
    contact_gap,
    materialize,
    place,
    procedural_place,
    revalidate_config,
    support_surface,
)
from tablesim.primitives import box_mesh, bumpy_table_mesh, table_mesh
from tablesim.synthetic import make_room_mesh


def dense_grid_height_oracle(table, rect, step=0.0005):
    """Independent support-height oracle: point-in-triangle via cross-product
    signs on a dense grid, max of plane heights."""
    x0, y0, x1, y1 = rect
    xs = np.arange(x0, x1 + step / 2, step)
    ys = np.arange(y0, y1 + step / 2, step)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    best = -np.inf
    tris = table.vertices[table.faces]
    for tri in tris:
        a, b, c = tri[:, :2][0], tri[:, :2][1], tri[:, :2][2]
        d1 = np.cross(np.append(b - a, 0.0), np.column_stack([pts - a, np.zeros(len(pts))]))[:, 2]
        d2 = np.cross(np.append(c - b, 0.0), np.column_stack([pts - b, np.zeros(len(pts))]))[:, 2]
        d3 = np.cross(np.append(a - c, 0.0), np.column_stack([pts - c, np.zeros(len(pts))]))[:, 2]
        inside = ((d1 >= 0) & (d2 >= 0) & (d3 >= 0)) | \
                 ((d1 <= 0) & (d2 <= 0) & (d3 <= 0))
        if not inside.any():
            continue
        n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        if abs(n[2]) < 1e-12:
            continue
        p = pts[inside]
        z = tri[0][2] - (n[0] * (p[:, 0] - tri[0][0]) + n[1] * (p[:, 1] - tri[0][1])) / n[2]
        best = max(best, z.max())
    return best


def test_calibrate_height_flat_table():
    table = table_mesh(1.2, 0.8, 0.75)
    z = calibrate_height(table, (-0.1, -0.1, 0.1, 0.1))
    assert z == pytest.approx(0.75, abs=1e-9)


def test_calibrate_height_bump_matches_dense_oracle():
    table = bumpy_table_mesh(1.2, 0.8, 0.75, bump_height=0.02, bump_size=0.1)
    rect = (-0.08, -0.08, 0.08, 0.08)  # covers part of the bump
    z = calibrate_height(table, rect)
    assert z == pytest.approx(0.77, abs=1e-9)
    assert z == pytest.approx(dense_grid_height_oracle(table, rect), abs=1e-9)


def test_calibrate_height_off_table():
    table = table_mesh(1.0, 0.6, 0.7)
    with pytest.raises(OffTableError):
        calibrate_height(table, (5.0, 5.0, 5.2, 5.2))


def make_tiny_catalog(tmp_path, bumpy=False):
    """Catalog with one table and two box objects; used for surgical cases."""
    (tmp_path / "m").mkdir(exist_ok=True)
    # the bump is wide enough that a half-overlapping book still has a
    # corner vertex resting on it
    table = bumpy_table_mesh(1.2, 0.8, 0.75, bump_size=0.2) if bumpy \
        else table_mesh(1.2, 0.8, 0.75)
    save_mesh(table, tmp_path / "m" / "table.ply")
    save_mesh(make_room_mesh(), tmp_path / "m" / "room.ply")
    save_mesh(box_mesh(0.2, 0.15, 0.1), tmp_path / "m" / "book.ply")
    save_mesh(box_mesh(0.06, 0.06, 0.12), tmp_path / "m" / "mug.ply")
    return AssetCatalog(
        objects=[
            CatalogObject(id="book_a", category="book", path="m/book.ply", size=0.2),
            CatalogObject(id="mug_a", category="mug", path="m/mug.ply", size=0.12),
        ],
        tables=[CatalogTable(id="t1", category="coffee_table",
                             room="m/room.ply", path="m/table.ply")],
        compatibility={"coffee_table": ("book", "mug")},
        root=tmp_path,
    )


def test_place_contact_on_flat_table(tmp_path):
    cat = make_tiny_catalog(tmp_path)
    config = SceneConfig(room_ref="m/room.ply", table_id="t1")
    p = place(config, cat, "mug_a", (0.1, 0.2), yaw=0.5)
    surf = support_surface(cat.table_mesh("t1"))
    gap = contact_gap(p, cat, surf)
    assert abs(gap) <= 1e-6
    # canonical bottom-at-zero asset: translation z equals the support height
    assert p.transform.translation[2] == pytest.approx(0.75, abs=1e-9)


def test_place_incompatible_category(tmp_path):
    cat = make_tiny_catalog(tmp_path)
    cat.compatibility = {"coffee_table": ("book",)}
    config = SceneConfig(room_ref="m/room.ply", table_id="t1")
    with pytest.raises(IncompatibleCategoryError):
        place(config, cat, "mug_a", (0.0, 0.0))


def test_second_object_same_spot_collides(tmp_path):
    cat = make_tiny_catalog(tmp_path)
    config = SceneConfig(room_ref="m/room.ply", table_id="t1")
    place(config, cat, "book_a", (0.0, 0.0))
    with pytest.raises(CollisionError):
        place(config, cat, "book_a", (0.0, 0.0))
    assert len(config.placements) == 1  # rejected placement not appended


def test_place_off_table(tmp_path):
    cat = make_tiny_catalog(tmp_path)
    config = SceneConfig(room_ref="m/room.ply", table_id="t1")
    with pytest.raises(OffTableError):
        place(config, cat, "mug_a", (3.0, 3.0))


def interpenetration_cells(p, catalog, surface, cell=0.001):
    """1mm voxel oracle: cells in the footprint where the table surface pokes
    above the object's bottom plane."""
    mesh = catalog.object_mesh(p.asset_id)
    verts = p.transform.apply_points(mesh.vertices)
    z0 = verts[:, 2].min()
    x0, y0, x1, y1 = p.footprint
    xs = np.arange(x0 + cell / 2, x1, cell)
    ys = np.arange(y0 + cell / 2, y1, cell)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    h = surface.heights_at(np.column_stack([gx.ravel(), gy.ravel()]))
    return int((h > z0 + 1e-6).sum())


def test_no_interpenetration_below_support(tmp_path):
    cat = make_tiny_catalog(tmp_path, bumpy=True)
    config = SceneConfig(room_ref="m/room.ply", table_id="t1")
    surf = support_surface(cat.table_mesh("t1"))
    # footprint half-on the bump: bottom must clear the bump top everywhere
    p = place(config, cat, "book_a", (0.08, 0.0), yaw=0.0, surface=surf)
    assert interpenetration_cells(p, cat, surf) == 0
    gap = contact_gap(p, cat, surf)
    assert gap >= -1e-6  # never below support


def test_check_collision_rules(tmp_path):
    cat = make_tiny_catalog(tmp_path)
    config = SceneConfig(room_ref="m/room.ply", table_id="t1")
    a = place(config, cat, "book_a", (-0.3, 0.0))
    # disjoint
    b = place(config, cat, "book_a", (0.3, 0.0))
    assert check_collision(b, [a], cat) == []
    # identical AABBs collide
    assert check_collision(a, [a], cat) == [0]
    # exact face contact is allowed (zero-volume intersection)
    fx0, fy0, fx1, fy1 = a.footprint
    width = fx1 - fx0
    c = Placement(asset_id="book_a",
                  transform=a.transform.__class__(
                      translation=a.transform.translation + np.array([width, 0, 0]),
                      yaw=a.transform.yaw, scale=a.transform.scale),
                  footprint=(fx0 + width, fy0, fx1 + width, fy1))
    assert check_collision(c, [a], cat) == []


def test_crowd_tolerates_1mm_slab(tmp_path):
    cat = make_tiny_catalog(tmp_path)
    a_cfg = SceneConfig(room_ref="m/room.ply", table_id="t1", variant="crowd")
    a = place(a_cfg, cat, "book_a", (0.0, 0.0))
    shift = 0.2 - 0.0005  # 0.5mm AABB overlap along x
    b = Placement(asset_id="book_a",
                  transform=a.transform.__class__(
                      translation=a.transform.translation + np.array([shift, 0, 0]),
                      yaw=0.0, scale=1.0),
                  footprint=(a.footprint[0] + shift, a.footprint[1],
                             a.footprint[2] + shift, a.footprint[3]))
    assert check_collision(b, [a], cat, tolerance=0.001) == []   # crowd
    assert check_collision(b, [a], cat, tolerance=0.0) == [0]    # vanilla


def test_procedural_default_count_ranges(demo_catalog):
    table = demo_catalog.tables[0]
    vanilla = SceneConfig(room_ref=table.room, table_id=table.id, seed=3,
                          variant="vanilla")
    procedural_place(vanilla, demo_catalog)
    assert 3 <= len(vanilla.placements) <= 8

    crowd = SceneConfig(room_ref=table.room, table_id=table.id, seed=4,
                        variant="crowd")
    procedural_place(crowd, demo_catalog)
    assert 10 <= len(crowd.placements) <= 16


def test_procedural_deterministic(demo_catalog):
    table = demo_catalog.tables[1]

    def build():
        config = SceneConfig(room_ref=table.room, table_id=table.id, seed=77,
                             variant="vanilla")
        procedural_place(config, demo_catalog)
        return config.dumps()

    assert build() == build()  # byte-identical serialized config


def test_procedural_exhausted(tmp_path):
    cat = make_tiny_catalog(tmp_path)
    config = SceneConfig(room_ref="m/room.ply", table_id="t1", seed=1)
    with pytest.raises(PlacementExhaustedError):
        # books are 0.2 x 0.15: a 1.2 x 0.8 table cannot host 200 of them
        procedural_place(config, cat, count_range=(200, 220), seed=1)


def test_materialize_empty_config(tmp_path):
    cat = make_tiny_catalog(tmp_path)
    config = SceneConfig(room_ref="m/room.ply", table_id="t1")
    scene = materialize(config, cat)
    assert scene.boxes == []
    room = cat.room_mesh("t1")
    table = cat.table_mesh("t1")
    assert scene.mesh.n_vertices == room.n_vertices + table.n_vertices


def test_materialize_box_dims_follow_scale(tmp_path):
    cat = make_tiny_catalog(tmp_path)
    config = SceneConfig(room_ref="m/room.ply", table_id="t1")
    place(config, cat, "book_a", (0.0, 0.0), yaw=0.7, scale=1.5)
    scene = materialize(config, cat)
    box = scene.boxes[0]
    np.testing.assert_allclose(box.dims, [0.3, 0.225, 0.15], atol=1e-9)
    assert box.yaw == pytest.approx(0.7)


def test_materialize_boxes_contain_their_vertices(demo_catalog):
    table = demo_catalog.tables[2]
    config = SceneConfig(room_ref=table.room, table_id=table.id, seed=21,
                         variant="vanilla")
    procedural_place(config, demo_catalog)
    scene = materialize(config, demo_catalog)
    assert len(scene.boxes) == len(config.placements)
    labels = scene.mesh.vertex_labels
    for box in scene.boxes:
        owned = labels[:, 1] == box.instance_id
        pts = scene.mesh.vertices[owned]
        frac = points_in_obb(pts, box).mean()
        assert frac >= 0.99


def test_config_serialization_roundtrip_materializes_identically(demo_catalog):
    table = demo_catalog.tables[3]
    config = SceneConfig(room_ref=table.room, table_id=table.id, seed=5,
                         variant="vanilla")
    procedural_place(config, demo_catalog)
    clone = SceneConfig.from_dict(
        __import__("json").loads(config.dumps()))
    a = materialize(config, demo_catalog)
    b = materialize(clone, demo_catalog)
    assert (a.mesh.vertices == b.mesh.vertices).all()
    assert [bx.to_dict() for bx in a.boxes] == [bx.to_dict() for bx in b.boxes]


def test_revalidate_detects_tampering(demo_catalog):
    table = demo_catalog.tables[0]
    config = SceneConfig(room_ref=table.room, table_id=table.id, seed=9,
                         variant="vanilla")
    procedural_place(config, demo_catalog)
    revalidate_config(config, demo_catalog)  # fresh config passes

    sunk = config.placements[0]
    sunk.transform.translation[2] -= 0.05  # push the object into the table
    with pytest.raises(Exception):
        revalidate_config(config, demo_catalog)
