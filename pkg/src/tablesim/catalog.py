"""Asset catalog: object CADs, table scans, and the table/object compatibility map.

The catalog manifest is a JSON document::

    {
      "objects": [{"id", "category", "path", "size"}],
      "tables":  [{"id", "category", "room", "path", "arc_deg": [lo, hi]}],
      "compatibility": {"table_category": ["object categories"]}
    }

Mesh paths are resolved relative to the manifest location. Catalogs are
immutable after load; meshes are cached per id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import (
    EmptyCatalogError,
    UnknownAssetError,
    UnknownTableError,
    ValidationError,
)
from .geometry import TriMesh
from .labels import DEFAULT_COMPATIBILITY, TABLETOP_CLASSES
from .meshio import load_mesh


@dataclass(frozen=True)
class CatalogObject:
    id: str
    category: str
    path: str
    size: float  # canonical physical max-extent, meters

    def to_dict(self) -> dict:
        return {"id": self.id, "category": self.category, "path": self.path,
                "size": self.size}


@dataclass(frozen=True)
class CatalogTable:
    id: str
    category: str
    room: str     # room mesh path (the table's surroundings)
    path: str     # table mesh path
    arc_deg: tuple[float, float] = (-180.0, 180.0)  # allowed camera azimuths

    def to_dict(self) -> dict:
        return {"id": self.id, "category": self.category, "room": self.room,
                "path": self.path, "arc_deg": list(self.arc_deg)}


@dataclass
class AssetCatalog:
    """Immutable registry of placeable objects and host tables."""

    objects: list[CatalogObject]
    tables: list[CatalogTable]
    compatibility: dict[str, tuple[str, ...]]
    root: Path = field(default_factory=Path)

    def __post_init__(self):
        self._objects_by_id = {o.id: o for o in self.objects}
        self._tables_by_id = {t.id: t for t in self.tables}
        self._by_category: dict[str, list[CatalogObject]] = {}
        for o in self.objects:
            self._by_category.setdefault(o.category, []).append(o)
        self._mesh_cache: dict[str, TriMesh] = {}

    def object(self, asset_id: str) -> CatalogObject:
        try:
            return self._objects_by_id[asset_id]
        except KeyError:
            raise UnknownAssetError(f"unknown asset '{asset_id}'")

    def table(self, table_id: str) -> CatalogTable:
        try:
            return self._tables_by_id[table_id]
        except KeyError:
            raise UnknownTableError(f"unknown table '{table_id}'")

    def objects_of_category(self, category: str) -> list[CatalogObject]:
        return list(self._by_category.get(category, []))

    def categories(self) -> list[str]:
        return sorted(self._by_category)

    def _load(self, rel_path: str) -> TriMesh:
        if rel_path not in self._mesh_cache:
            self._mesh_cache[rel_path] = load_mesh(self.root / rel_path)
        return self._mesh_cache[rel_path]

    def object_mesh(self, asset_id: str) -> TriMesh:
        return self._load(self.object(asset_id).path)

    def table_mesh(self, table_id: str) -> TriMesh:
        return self._load(self.table(table_id).path)

    def room_mesh(self, table_id: str) -> TriMesh:
        return self._load(self.table(table_id).room)

    def require_nonempty(self):
        if not self.tables or not self.objects:
            raise EmptyCatalogError("catalog has no tables or no objects")

    def to_manifest(self) -> dict:
        return {
            "objects": [o.to_dict() for o in self.objects],
            "tables": [t.to_dict() for t in self.tables],
            "compatibility": {k: list(v) for k, v in self.compatibility.items()},
        }


def load_catalog(manifest_path) -> AssetCatalog:
    """Parse a catalog manifest JSON; paths resolve against its directory."""
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"cannot read catalog manifest {manifest_path}: {e}")
    objects = [
        CatalogObject(id=o["id"], category=o["category"], path=o["path"],
                      size=float(o.get("size", 0.1)))
        for o in doc.get("objects", [])
    ]
    tables = [
        CatalogTable(id=t["id"], category=t["category"], room=t["room"],
                     path=t["path"], arc_deg=tuple(t.get("arc_deg", (-180.0, 180.0))))
        for t in doc.get("tables", [])
    ]
    compat = {k: tuple(v) for k, v in doc.get("compatibility", {}).items()}
    if not compat:
        compat = {k: tuple(v) for k, v in DEFAULT_COMPATIBILITY.items()}
    return AssetCatalog(objects, tables, compat, root=manifest_path.parent)


def save_catalog(catalog: AssetCatalog, manifest_path) -> None:
    Path(manifest_path).write_text(
        json.dumps(catalog.to_manifest(), indent=2, sort_keys=True) + "\n")


def candidate_categories(table_id: str, catalog: AssetCatalog,
                         compatibility: Optional[dict] = None) -> list[str]:
    """Object categories allowed on this table, in deterministic order."""
    table = catalog.table(table_id)
    compat = compatibility if compatibility is not None else catalog.compatibility
    cats = compat.get(table.category)
    if cats is None:
        raise UnknownTableError(
            f"table category '{table.category}' missing from compatibility map")
    return sorted(cats)


@dataclass
class CatalogFinding:
    kind: str      # duplicate_id | dangling_ref | empty_category_table | unknown_category
    subject: str
    detail: str


def validate_catalog(catalog: AssetCatalog) -> list[CatalogFinding]:
    """Report-only integrity checks: duplicates, dangling refs, empty tables."""
    findings = []
    seen: set[str] = set()
    for o in catalog.objects:
        if o.id in seen:
            findings.append(CatalogFinding("duplicate_id", o.id, "object id repeats"))
        seen.add(o.id)
        if not (catalog.root / o.path).exists():
            findings.append(CatalogFinding("dangling_ref", o.id, f"missing mesh {o.path}"))
        if o.category not in TABLETOP_CLASSES:
            findings.append(CatalogFinding("unknown_category", o.id,
                                           f"'{o.category}' not in taxonomy"))
        if not o.size > 0:
            findings.append(CatalogFinding("bad_size", o.id, "size must be positive"))
    tseen: set[str] = set()
    for t in catalog.tables:
        if t.id in tseen:
            findings.append(CatalogFinding("duplicate_id", t.id, "table id repeats"))
        tseen.add(t.id)
        for p in (t.path, t.room):
            if not (catalog.root / p).exists():
                findings.append(CatalogFinding("dangling_ref", t.id, f"missing mesh {p}"))
        cats = catalog.compatibility.get(t.category, ())
        available = [c for c in cats if catalog.objects_of_category(c)]
        if not available:
            findings.append(CatalogFinding("empty_category_table", t.id,
                                           f"no placeable objects for '{t.category}'"))
    return findings
