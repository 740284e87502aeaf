/** Binary STL decoding: wire format -> flat vertex positions. No
 * geometry is derived here beyond reading what the service sent. */

export interface StlData {
  positions: Float32Array; // 9 floats per facet
  facetCount: number;
}

export function parseBinaryStl(buffer: ArrayBuffer): StlData {
  if (buffer.byteLength < 84) {
    throw new Error(`binary STL needs at least 84 bytes, got ${buffer.byteLength}`);
  }
  const view = new DataView(buffer);
  const count = view.getUint32(80, true);
  if (buffer.byteLength !== 84 + 50 * count) {
    throw new Error(`facet count ${count} does not match byte length ${buffer.byteLength}`);
  }
  const positions = new Float32Array(count * 9);
  for (let i = 0; i < count; i++) {
    const base = 84 + i * 50 + 12; // skip the stored facet normal
    for (let k = 0; k < 9; k++) {
      positions[i * 9 + k] = view.getFloat32(base + k * 4, true);
    }
  }
  return { positions, facetCount: count };
}
