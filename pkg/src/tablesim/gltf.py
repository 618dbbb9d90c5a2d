"""Minimal glTF 2.0 export (embedded buffer) for the browser 3D view."""

from __future__ import annotations

import base64
import json

import numpy as np

from .geometry import TriMesh

_FLOAT = 5126
_UINT32 = 5125
_ARRAY_BUFFER = 34962
_ELEMENT_ARRAY_BUFFER = 34963


def mesh_to_gltf(mesh: TriMesh, name: str = "mesh") -> bytes:
    """Serialize a TriMesh as a self-contained .gltf JSON document."""
    positions = np.ascontiguousarray(mesh.vertices, dtype="<f4")
    indices = np.ascontiguousarray(mesh.faces.reshape(-1), dtype="<u4")
    pos_bytes = positions.tobytes()
    idx_bytes = indices.tobytes()
    buffer = pos_bytes + idx_bytes
    doc = {
        "asset": {"version": "2.0", "generator": "tablesim"},
        "scene": 0,
        "scenes": [{"nodes": [0]}],
        "nodes": [{"mesh": 0, "name": name}],
        "meshes": [{
            "primitives": [{
                "attributes": {"POSITION": 0},
                "indices": 1,
                "mode": 4,
            }],
            "name": name,
        }],
        "accessors": [
            {
                "bufferView": 0,
                "componentType": _FLOAT,
                "count": len(positions),
                "type": "VEC3",
                "min": [float(v) for v in positions.min(axis=0)] if len(positions) else [0, 0, 0],
                "max": [float(v) for v in positions.max(axis=0)] if len(positions) else [0, 0, 0],
            },
            {
                "bufferView": 1,
                "componentType": _UINT32,
                "count": len(indices),
                "type": "SCALAR",
            },
        ],
        "bufferViews": [
            {"buffer": 0, "byteOffset": 0, "byteLength": len(pos_bytes),
             "target": _ARRAY_BUFFER},
            {"buffer": 0, "byteOffset": len(pos_bytes), "byteLength": len(idx_bytes),
             "target": _ELEMENT_ARRAY_BUFFER},
        ],
        "buffers": [{
            "byteLength": len(buffer),
            "uri": "data:application/octet-stream;base64,"
                   + base64.b64encode(buffer).decode("ascii"),
        }],
    }
    return json.dumps(doc).encode("ascii")
