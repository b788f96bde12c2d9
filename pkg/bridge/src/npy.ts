/**
 * NPY v1.0 interchange: the on-disk tensor format the core reads and writes.
 *
 * Only little-endian float32/float64 payloads in C order are handled, which
 * is exactly what the core accepts. Headers are padded to a 64-byte
 * boundary so files are byte-compatible with mainstream writers.
 */

import { readFileSync, writeFileSync } from 'node:fs';

const MAGIC = Buffer.from('\x93NUMPY', 'latin1');
const HEADER_ALIGN = 64;

export type NpyPrecision = 'f32' | 'f64';

export interface NpyArray {
  shape: number[];
  /** Row-major (C order) values, widened to float64. */
  data: Float64Array;
}

export function elementCount(shape: number[]): number {
  return shape.reduce((acc, n) => acc * n, 1);
}

export function serializeNpy(array: NpyArray, precision: NpyPrecision = 'f32'): Buffer {
  const { shape, data } = array;
  if (shape.length === 0) {
    throw new Error('scalar (rank-0) tensors cannot be written; reshape to [1]');
  }
  if (elementCount(shape) !== data.length) {
    throw new Error(`shape [${shape}] does not match ${data.length} values`);
  }
  for (const v of data) {
    if (!Number.isFinite(v)) throw new Error('tensor contains non-finite values');
  }
  const descr = precision === 'f32' ? '<f4' : '<f8';
  const shapeRepr = shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(', ')})`;
  const header = `{'descr': '${descr}', 'fortran_order': False, 'shape': ${shapeRepr}, }`;
  const base = MAGIC.length + 2 + 2;
  let pad = HEADER_ALIGN - ((base + header.length + 1) % HEADER_ALIGN);
  if (pad === HEADER_ALIGN) pad = 0;
  const headerBytes = Buffer.from(header + ' '.repeat(pad) + '\n', 'latin1');

  const itemSize = precision === 'f32' ? 4 : 8;
  const payload = Buffer.alloc(data.length * itemSize);
  const view = new DataView(payload.buffer, payload.byteOffset, payload.byteLength);
  for (let i = 0; i < data.length; i++) {
    if (precision === 'f32') view.setFloat32(i * 4, data[i], true);
    else view.setFloat64(i * 8, data[i], true);
  }

  const head = Buffer.alloc(base);
  MAGIC.copy(head, 0);
  head[6] = 1;
  head[7] = 0;
  head.writeUInt16LE(headerBytes.length, 8);
  return Buffer.concat([head, headerBytes, payload]);
}

export function parseNpy(raw: Buffer): NpyArray {
  if (raw.length < 10 || !raw.subarray(0, 6).equals(MAGIC)) {
    throw new Error('not an NPY file: bad magic bytes');
  }
  if (raw[6] !== 1 || raw[7] !== 0) {
    throw new Error(`unsupported NPY version ${raw[6]}.${raw[7]}; only 1.0 is handled`);
  }
  const headerLen = raw.readUInt16LE(8);
  const headerEnd = 10 + headerLen;
  if (raw.length < headerEnd) throw new Error('truncated NPY header');
  const header = raw.subarray(10, headerEnd).toString('latin1');

  const descrMatch = header.match(/'descr'\s*:\s*'([^']+)'/);
  if (!descrMatch) throw new Error("NPY header missing field 'descr'");
  const descr = descrMatch[1];
  if (descr !== '<f4' && descr !== '<f8') {
    throw new Error(`unsupported dtype descr '${descr}'; only '<f4' and '<f8' are handled`);
  }
  const fortranMatch = header.match(/'fortran_order'\s*:\s*(True|False)/);
  if (!fortranMatch) throw new Error("NPY header missing field 'fortran_order'");
  if (fortranMatch[1] === 'True') {
    throw new Error('fortran_order=True layouts are not supported');
  }
  const shapeMatch = header.match(/'shape'\s*:\s*\(([^)]*)\)/);
  if (!shapeMatch) throw new Error("NPY header missing field 'shape'");
  const shape = shapeMatch[1]
    .split(',')
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => {
      const n = Number(s);
      if (!Number.isInteger(n) || n < 0) throw new Error(`invalid shape entry '${s}'`);
      return n;
    });

  const itemSize = descr === '<f4' ? 4 : 8;
  const count = elementCount(shape);
  const expected = count * itemSize;
  const payload = raw.subarray(headerEnd);
  if (payload.length !== expected) {
    throw new Error(
      `NPY data section has ${payload.length} bytes, header shape (${shape}) needs ${expected}`,
    );
  }
  const view = new DataView(payload.buffer, payload.byteOffset, payload.byteLength);
  const data = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = descr === '<f4' ? view.getFloat32(i * 4, true) : view.getFloat64(i * 8, true);
  }
  for (const v of data) {
    if (!Number.isFinite(v)) throw new Error('array contains non-finite values');
  }
  return { shape, data };
}

export function writeNpy(path: string, array: NpyArray, precision: NpyPrecision = 'f32'): void {
  writeFileSync(path, serializeNpy(array, precision));
}

export function readNpy(path: string): NpyArray {
  return parseNpy(readFileSync(path));
}
