import pytest

from tablesim.catalog import (
    AssetCatalog,
    CatalogObject,
    CatalogTable,
    candidate_categories,
    load_catalog,
    save_catalog,
    validate_catalog,
)
from tablesim.errors import UnknownTableError
from tablesim.labels import TABLETOP_CLASSES, TABLETOP_IDS


def test_taxonomy_has_52_tabletop_classes():
    assert len(TABLETOP_CLASSES) == 52
    assert len(set(TABLETOP_CLASSES)) == 52
    assert min(TABLETOP_IDS.values()) == 100


def test_mug_fits_coffee_table(demo_catalog):
    cats = candidate_categories("coffee_table_01", demo_catalog)
    assert "mug" in cats


def test_pencil_fits_writing_desk(demo_catalog):
    cats = candidate_categories("desk_01", demo_catalog)
    assert "pencil" in cats


def test_unknown_table_raises(demo_catalog):
    with pytest.raises(UnknownTableError):
        candidate_categories("no_such_table", demo_catalog)


def test_candidates_deterministic_nonempty_subset(demo_catalog):
    for table in demo_catalog.tables:
        cats = candidate_categories(table.id, demo_catalog)
        assert cats, f"table {table.id} offers no categories"
        assert cats == sorted(cats)
        assert set(cats) <= set(TABLETOP_CLASSES)
        assert cats == candidate_categories(table.id, demo_catalog)


def test_validate_clean_catalog(demo_catalog):
    assert validate_catalog(demo_catalog) == []


def test_validate_duplicate_and_dangling(tmp_path, demo_catalog):
    first = demo_catalog.objects[0]
    table = demo_catalog.tables[0]
    bad = AssetCatalog(
        objects=[first, CatalogObject(id=first.id, category=first.category,
                                      path="objects/missing.ply", size=0.1)],
        tables=[table],
        compatibility=demo_catalog.compatibility,
        root=demo_catalog.root,
    )
    kinds = {f.kind for f in validate_catalog(bad)}
    assert "duplicate_id" in kinds
    assert "dangling_ref" in kinds


def test_validate_empty_category_table(demo_catalog):
    table = CatalogTable(id="lonely", category="dining_table",
                         room=demo_catalog.tables[0].room,
                         path=demo_catalog.tables[0].path)
    bad = AssetCatalog(objects=[], tables=[table],
                       compatibility=demo_catalog.compatibility,
                       root=demo_catalog.root)
    kinds = [f.kind for f in validate_catalog(bad)]
    assert "empty_category_table" in kinds


def test_manifest_roundtrip(tmp_path, demo_catalog):
    path = demo_catalog.root / "roundtrip.json"
    save_catalog(demo_catalog, path)
    back = load_catalog(path)
    assert [o.id for o in back.objects] == [o.id for o in demo_catalog.objects]
    assert [t.id for t in back.tables] == [t.id for t in demo_catalog.tables]
    assert back.compatibility == demo_catalog.compatibility
    assert back.table_mesh(back.tables[0].id).n_vertices > 0


def test_mesh_cache_returns_same_object(demo_catalog):
    a = demo_catalog.object_mesh(demo_catalog.objects[0].id)
    b = demo_catalog.object_mesh(demo_catalog.objects[0].id)
    assert a is b
