/** Minimal glTF 2.0 reader for the service's single-mesh documents
 * (embedded base64 buffer, float32 POSITION, uint32 indices). Kept free of
 * three.js so it is unit-testable in node.
 */

export interface ParsedMesh {
  positions: Float32Array;
  indices: Uint32Array;
}

interface GltfDoc {
  buffers: { uri: string; byteLength: number }[];
  bufferViews: { buffer: number; byteOffset?: number; byteLength: number }[];
  accessors: {
    bufferView: number;
    componentType: number;
    count: number;
    type: string;
  }[];
  meshes: { primitives: { attributes: { POSITION: number }; indices: number }[] }[];
}

const B64_PREFIX = "data:application/octet-stream;base64,";

function decodeBase64(data: string): Uint8Array {
  if (typeof atob === "function") {
    const bin = atob(data);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  // node fallback (tests); typed loosely so the browser build needs no node types
  const nodeBuffer = (globalThis as { Buffer?: { from(s: string, e: string): Uint8Array } }).Buffer;
  if (!nodeBuffer) throw new Error("no base64 decoder available");
  return new Uint8Array(nodeBuffer.from(data, "base64"));
}

export function parseGltf(json: string | GltfDoc): ParsedMesh {
  const doc: GltfDoc = typeof json === "string" ? JSON.parse(json) : json;
  const uri = doc.buffers[0].uri;
  if (!uri.startsWith(B64_PREFIX)) {
    throw new Error("expected an embedded base64 buffer");
  }
  const buffer = decodeBase64(uri.slice(B64_PREFIX.length));
  const prim = doc.meshes[0].primitives[0];

  const read = (accessorIdx: number) => {
    const accessor = doc.accessors[accessorIdx];
    const view = doc.bufferViews[accessor.bufferView];
    const offset = view.byteOffset ?? 0;
    const bytes = buffer.slice(offset, offset + view.byteLength);
    return { accessor, bytes };
  };

  const pos = read(prim.attributes.POSITION);
  if (pos.accessor.componentType !== 5126 || pos.accessor.type !== "VEC3") {
    throw new Error("POSITION must be float32 VEC3");
  }
  const idx = read(prim.indices);
  if (idx.accessor.componentType !== 5125) {
    throw new Error("indices must be uint32");
  }
  return {
    positions: new Float32Array(pos.bytes.buffer, pos.bytes.byteOffset,
                                pos.accessor.count * 3),
    indices: new Uint32Array(idx.bytes.buffer, idx.bytes.byteOffset,
                             idx.accessor.count),
  };
}
