"""Exception types shared across the library."""


class TablesimError(Exception):
    """Base class for all library errors."""


class EmptyGeometryError(TablesimError):
    """Operation requires at least one vertex."""


class ParseError(TablesimError):
    """Mesh file could not be parsed; carries location context."""

    def __init__(self, message, path=None, line=None, offset=None):
        loc = []
        if path is not None:
            loc.append(str(path))
        if line is not None:
            loc.append(f"line {line}")
        if offset is not None:
            loc.append(f"offset {offset}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.path = path
        self.line = line
        self.offset = offset


class UnsupportedFormatError(TablesimError):
    """Mesh file extension/magic is not OBJ or PLY."""


class UnknownTableError(TablesimError):
    """Table id missing from the catalog."""


class UnknownAssetError(TablesimError):
    """Object asset id missing from the catalog."""


class OffTableError(TablesimError):
    """Requested footprint does not overlap the table's BEV extent."""


class CollisionError(TablesimError):
    """Placement overlaps existing placements beyond tolerance."""

    def __init__(self, ids):
        super().__init__(f"collides with placement(s) {sorted(ids)}")
        self.ids = list(ids)


class IncompatibleCategoryError(TablesimError):
    """Object category not allowed on this table type."""


class PlacementExhaustedError(TablesimError):
    """Rejection sampling could not reach the minimum object count."""


class EmptyVolumeError(TablesimError):
    """TSDF volume holds no zero-crossing to triangulate."""


class VariantMismatchError(TablesimError):
    """Scene config does not match the requested variant profile."""


class LengthMismatchError(TablesimError):
    """Paired label arrays differ in length."""


class BadCountError(TablesimError):
    """Requested sample count outside [1, N]."""


class BadVoxelSizeError(TablesimError):
    """Voxel size must be strictly positive."""


class EmptyCatalogError(TablesimError):
    """Catalog holds no tables/objects to serve."""


class ValidationError(TablesimError):
    """Invalid user-supplied configuration or arguments."""


class PipelineError(TablesimError):
    """A pipeline stage failed mid-run."""
