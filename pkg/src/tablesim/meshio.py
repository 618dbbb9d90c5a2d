"""OBJ and PLY mesh reading/writing.

PLY vertices are written as doubles so a save -> load round trip preserves
coordinates bit-exactly. Per-vertex integer properties ``semantic_id`` and
``instance_id`` carry labels; arbitrary extra float properties (e.g. a
``score`` field) ride along through :func:`read_ply` / :func:`write_ply`.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .errors import ParseError, UnsupportedFormatError
from .geometry import TriMesh

_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}
_NUMPY_TO_PLY = {
    "int8": "char", "uint8": "uchar",
    "int16": "short", "uint16": "ushort",
    "int32": "int", "uint32": "uint",
    "float32": "float", "float64": "double",
}


def load_mesh(path) -> TriMesh:
    """Load an OBJ or PLY file into a TriMesh (labels populated when present)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        return _load_obj(path)
    if suffix == ".ply":
        props, faces = read_ply(path)
        return _mesh_from_props(path, props, faces)
    raise UnsupportedFormatError(f"unsupported mesh format '{suffix}' ({path})")


def save_mesh(mesh: TriMesh, path, binary: bool = True) -> None:
    """Write a TriMesh as OBJ or PLY (binary little-endian PLY by default)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        _save_obj(mesh, path)
        return
    if suffix == ".ply":
        props = {
            "x": mesh.vertices[:, 0],
            "y": mesh.vertices[:, 1],
            "z": mesh.vertices[:, 2],
        }
        if mesh.vertex_labels is not None:
            props["semantic_id"] = mesh.vertex_labels[:, 0]
            props["instance_id"] = mesh.vertex_labels[:, 1]
        write_ply(path, props, mesh.faces, binary=binary)
        return
    raise UnsupportedFormatError(f"unsupported mesh format '{suffix}' ({path})")


def _mesh_from_props(path, props, faces) -> TriMesh:
    for axis in ("x", "y", "z"):
        if axis not in props:
            raise ParseError(f"vertex element lacks '{axis}' property", path=path)
    vertices = np.column_stack([props["x"], props["y"], props["z"]]).astype(np.float64)
    labels = None
    if "semantic_id" in props and "instance_id" in props:
        labels = np.column_stack([props["semantic_id"], props["instance_id"]]).astype(np.int32)
    return TriMesh(vertices, faces, labels)


# ---------------------------------------------------------------- OBJ


def _load_obj(path: Path) -> TriMesh:
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read file: {e}", path=path)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ParseError("vertex line needs 3 coordinates", path=path, line=lineno)
            try:
                vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError:
                raise ParseError("malformed vertex coordinate", path=path, line=lineno)
        elif tag == "f":
            if len(parts) < 4:
                raise ParseError("face line needs at least 3 indices", path=path, line=lineno)
            idx = []
            for token in parts[1:]:
                head = token.split("/")[0]
                try:
                    i = int(head)
                except ValueError:
                    raise ParseError("malformed face index", path=path, line=lineno)
                # OBJ indices are 1-based; negative counts back from the end
                idx.append(i - 1 if i > 0 else len(vertices) + i)
            # fan-triangulate polygons
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
        # vt/vn/usemtl/o/g/s/mtllib silently ignored
    verts = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    tri = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if len(tri) and (tri.min() < 0 or tri.max() >= len(verts)):
        raise ParseError("face references missing vertex", path=path)
    return TriMesh(verts, tri.astype(np.int32))


def _save_obj(mesh: TriMesh, path: Path) -> None:
    buf = io.StringIO()
    for v in mesh.vertices:
        buf.write(f"v {v[0]!r} {v[1]!r} {v[2]!r}\n")
    for f in mesh.faces:
        buf.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
    path.write_text(buf.getvalue())


# ---------------------------------------------------------------- PLY


def read_ply(path) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Read a PLY file: ({property name: per-vertex array}, (M, 3) faces)."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ParseError(f"cannot read file: {e}", path=path)
    if not data.startswith(b"ply"):
        raise ParseError("missing 'ply' magic", path=path, offset=0)

    end = data.find(b"end_header\n")
    if end < 0:
        raise ParseError("missing end_header", path=path)
    header = data[:end].decode("ascii", errors="replace").splitlines()
    body = data[end + len(b"end_header\n"):]

    fmt = None
    elements = []  # (name, count, [(ply_type or ('list', ct, it), prop_name)])
    for lineno, line in enumerate(header[1:], start=2):
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise ParseError("property before element", path=path, line=lineno)
            if parts[1] == "list":
                elements[-1][2].append((("list", parts[2], parts[3]), parts[4]))
            else:
                elements[-1][2].append((parts[1], parts[2]))
    if fmt not in ("ascii", "binary_little_endian", "binary_big_endian"):
        raise ParseError(f"unsupported ply format '{fmt}'", path=path)

    if fmt == "ascii":
        return _read_ply_ascii(path, body, elements)
    endian = "<" if fmt == "binary_little_endian" else ">"
    return _read_ply_binary(path, body, elements, endian, header_len=end + len(b"end_header\n"))


def _finish(path, vertex_props, faces):
    if vertex_props is None:
        raise ParseError("no vertex element", path=path)
    if faces is None:
        faces = np.zeros((0, 3), dtype=np.int32)
    return vertex_props, faces


def _read_ply_ascii(path, body, elements):
    tokens = body.split()
    pos = 0
    vertex_props = None
    faces = None
    for name, count, props in elements:
        if name == "vertex":
            width = len(props)
            if any(isinstance(t, tuple) for t, _ in props):
                raise ParseError("list property on vertex element unsupported", path=path)
            need = count * width
            if pos + need > len(tokens):
                raise ParseError("truncated vertex data", path=path, offset=pos)
            block = np.asarray(tokens[pos:pos + need], dtype=np.float64).reshape(count, width)
            pos += need
            vertex_props = {
                pname: block[:, i].astype(_PLY_TYPES[ptype])
                for i, (ptype, pname) in enumerate(props)
            }
        elif name == "face":
            out = []
            for _ in range(count):
                if pos >= len(tokens):
                    raise ParseError("truncated face data", path=path, offset=pos)
                n = int(tokens[pos]); pos += 1
                if pos + n > len(tokens):
                    raise ParseError("truncated face data", path=path, offset=pos)
                idx = [int(t) for t in tokens[pos:pos + n]]
                pos += n
                for k in range(1, n - 1):
                    out.append((idx[0], idx[k], idx[k + 1]))
            faces = np.asarray(out, dtype=np.int32).reshape(-1, 3)
        else:
            # skip unknown fixed-width elements
            width = len(props)
            pos += count * width
    return _finish(path, vertex_props, faces)


def _read_ply_binary(path, body, elements, endian, header_len):
    offset = 0
    vertex_props = None
    faces = None
    for name, count, props in elements:
        if name == "vertex":
            if any(isinstance(t, tuple) for t, _ in props):
                raise ParseError("list property on vertex element unsupported", path=path)
            dtype = np.dtype([(p, endian + _PLY_TYPES[t]) for t, p in props])
            need = count * dtype.itemsize
            if offset + need > len(body):
                raise ParseError("truncated vertex data", path=path,
                                 offset=header_len + offset)
            rec = np.frombuffer(body, dtype=dtype, count=count, offset=offset)
            offset += need
            vertex_props = {p: np.ascontiguousarray(rec[p]) for _, p in props}
        elif name == "face":
            if len(props) != 1 or not isinstance(props[0][0], tuple):
                raise ParseError("face element must hold a single list property", path=path)
            _, ct, it = props[0][0]
            cdt = np.dtype(endian + _PLY_TYPES[ct])
            idt = np.dtype(endian + _PLY_TYPES[it])
            # fast path: uniform triangles
            uniform = np.dtype([("n", cdt), ("v", idt, (3,))])
            if offset + count * uniform.itemsize <= len(body):
                rec = np.frombuffer(body, dtype=uniform, count=count, offset=offset)
                if count == 0 or (rec["n"] == 3).all():
                    faces = rec["v"].astype(np.int32).reshape(-1, 3)
                    offset += count * uniform.itemsize
                    continue
            out = []
            for _ in range(count):
                if offset + cdt.itemsize > len(body):
                    raise ParseError("truncated face data", path=path,
                                     offset=header_len + offset)
                n = int(np.frombuffer(body, dtype=cdt, count=1, offset=offset)[0])
                offset += cdt.itemsize
                if offset + n * idt.itemsize > len(body):
                    raise ParseError("truncated face data", path=path,
                                     offset=header_len + offset)
                idx = np.frombuffer(body, dtype=idt, count=n, offset=offset)
                offset += n * idt.itemsize
                for k in range(1, n - 1):
                    out.append((idx[0], idx[k], idx[k + 1]))
            faces = np.asarray(out, dtype=np.int32).reshape(-1, 3)
        else:
            dtype = np.dtype([(p, endian + _PLY_TYPES[t]) for t, p in props])
            offset += count * dtype.itemsize
    return _finish(path, vertex_props, faces)


def write_ply(path, vertex_props: dict[str, np.ndarray], faces=None,
              binary: bool = True) -> None:
    """Write vertex properties (and optional triangle faces) as a PLY file."""
    path = Path(path)
    names = list(vertex_props)
    arrays = []
    for n in names:
        a = np.asarray(vertex_props[n])
        if a.dtype.name not in _NUMPY_TO_PLY:
            a = a.astype(np.int32 if a.dtype.kind in "iu" else np.float64)
        arrays.append(a)
    n_verts = len(arrays[0]) if arrays else 0
    for n, a in zip(names, arrays):
        if len(a) != n_verts:
            raise ValueError(f"property '{n}' length mismatch")
    if faces is None:
        faces = np.zeros((0, 3), dtype=np.int32)
    faces = np.asarray(faces, dtype=np.int32).reshape(-1, 3)

    lines = ["ply"]
    lines.append("format binary_little_endian 1.0" if binary else "format ascii 1.0")
    lines.append(f"element vertex {n_verts}")
    for n, a in zip(names, arrays):
        lines.append(f"property {_NUMPY_TO_PLY[a.dtype.name]} {n}")
    lines.append(f"element face {len(faces)}")
    lines.append("property list uchar int vertex_indices")
    lines.append("end_header")
    header = "\n".join(lines) + "\n"

    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        if binary:
            dtype = np.dtype([(n, "<" + a.dtype.str[1:]) for n, a in zip(names, arrays)])
            rec = np.empty(n_verts, dtype=dtype)
            for n, a in zip(names, arrays):
                rec[n] = a
            f.write(rec.tobytes())
            fdt = np.dtype([("n", "u1"), ("v", "<i4", (3,))])
            frec = np.empty(len(faces), dtype=fdt)
            frec["n"] = 3
            frec["v"] = faces
            f.write(frec.tobytes())
        else:
            out = io.StringIO()
            for i in range(n_verts):
                out.write(" ".join(_fmt_ascii(a[i]) for a in arrays) + "\n")
            for face in faces:
                out.write(f"3 {face[0]} {face[1]} {face[2]}\n")
            f.write(out.getvalue().encode("ascii"))


def _fmt_ascii(v) -> str:
    if np.issubdtype(type(v), np.integer) or isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))
