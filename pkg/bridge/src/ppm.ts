/** Binary PPM (P6, maxval 255) image interchange, matching the core's loader. */

import { readFileSync, writeFileSync } from 'node:fs';

export interface RgbImage {
  width: number;
  height: number;
  /** Row-major RGB triples in [0, 1]. */
  pixels: Float64Array;
}

export function parsePpm(raw: Buffer): RgbImage {
  if (raw.subarray(0, 2).toString('latin1') !== 'P6') {
    throw new Error('not a binary (P6) PPM');
  }
  let pos = 2;
  const fields: string[] = [];
  while (fields.length < 3) {
    while (pos < raw.length && isSpace(raw[pos])) pos++;
    if (raw[pos] === 0x23) {
      while (pos < raw.length && raw[pos] !== 0x0a) pos++;
      continue;
    }
    const start = pos;
    while (pos < raw.length && !isSpace(raw[pos])) pos++;
    if (start === pos) throw new Error('truncated PPM header');
    fields.push(raw.subarray(start, pos).toString('latin1'));
  }
  pos++; // single whitespace byte after maxval
  const [width, height, maxval] = fields.map(Number);
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new Error(`bad PPM dimensions ${width}x${height}`);
  }
  if (maxval !== 255) throw new Error(`PPM maxval ${maxval} unsupported; only 8-bit (255)`);
  const need = width * height * 3;
  const body = raw.subarray(pos, pos + need);
  if (body.length !== need) {
    throw new Error(`PPM data section has ${body.length} bytes, expected ${need}`);
  }
  const pixels = new Float64Array(need);
  for (let i = 0; i < need; i++) pixels[i] = body[i] / 255;
  return { width, height, pixels };
}

export function readPpm(path: string): RgbImage {
  return parsePpm(readFileSync(path));
}

export function serializePpm(image: RgbImage): Buffer {
  const header = Buffer.from(`P6\n${image.width} ${image.height}\n255\n`, 'latin1');
  const body = Buffer.alloc(image.pixels.length);
  for (let i = 0; i < image.pixels.length; i++) {
    const v = Math.min(Math.max(image.pixels[i], 0), 1);
    body[i] = Math.floor(v * 255 + 0.5);
  }
  return Buffer.concat([header, body]);
}

export function writePpm(path: string, image: RgbImage): void {
  writeFileSync(path, serializePpm(image));
}

/** BT.601 luma, the same convention the core's grayscale uses. */
export function toGrayscale(image: RgbImage): RgbImage {
  const pixels = new Float64Array(image.pixels.length);
  for (let p = 0; p < image.width * image.height; p++) {
    const r = image.pixels[3 * p];
    const g = image.pixels[3 * p + 1];
    const b = image.pixels[3 * p + 2];
    const y = 0.299 * r + 0.587 * g + 0.114 * b;
    pixels[3 * p] = y;
    pixels[3 * p + 1] = y;
    pixels[3 * p + 2] = y;
  }
  return { width: image.width, height: image.height, pixels };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0b || byte === 0x0c;
}
