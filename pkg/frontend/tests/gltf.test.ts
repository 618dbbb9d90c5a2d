import { describe, expect, it } from "vitest";

import { parseGltf } from "../src/gltf.js";

function buildDoc(positions: number[], indices: number[]) {
  const pos = new Float32Array(positions);
  const idx = new Uint32Array(indices);
  const posBytes = new Uint8Array(pos.buffer);
  const idxBytes = new Uint8Array(idx.buffer);
  const buffer = new Uint8Array(posBytes.length + idxBytes.length);
  buffer.set(posBytes, 0);
  buffer.set(idxBytes, posBytes.length);
  return {
    asset: { version: "2.0" },
    buffers: [{
      byteLength: buffer.length,
      uri: "data:application/octet-stream;base64,"
        + Buffer.from(buffer).toString("base64"),
    }],
    bufferViews: [
      { buffer: 0, byteOffset: 0, byteLength: posBytes.length },
      { buffer: 0, byteOffset: posBytes.length, byteLength: idxBytes.length },
    ],
    accessors: [
      { bufferView: 0, componentType: 5126, count: positions.length / 3, type: "VEC3" },
      { bufferView: 1, componentType: 5125, count: indices.length, type: "SCALAR" },
    ],
    meshes: [{ primitives: [{ attributes: { POSITION: 0 }, indices: 1, mode: 4 }] }],
  };
}

describe("gltf parsing", () => {
  it("round-trips positions and indices through the embedded buffer", () => {
    const positions = [0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1];
    const indices = [0, 1, 2, 0, 2, 3];
    const doc = buildDoc(positions, indices);
    const mesh = parseGltf(JSON.stringify(doc));
    expect(Array.from(mesh.positions)).toEqual(positions);
    expect(Array.from(mesh.indices)).toEqual(indices);
  });

  it("rejects non-embedded buffers", () => {
    const doc = buildDoc([0, 0, 0], [0]);
    doc.buffers[0].uri = "external.bin";
    expect(() => parseGltf(JSON.stringify(doc))).toThrow(/embedded/);
  });
});
