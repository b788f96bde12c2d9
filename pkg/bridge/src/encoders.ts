/**
 * Encoder registry.
 *
 * Real image encoders (CLIP-family) and autoencoders load lazily and fail
 * with a descriptive error when the runtime or weights are missing, so
 * callers can skip gracefully. The deterministic `mock:` encoders exist so
 * interchange plumbing stays testable in environments without any weights;
 * they do not implement any math the core owns.
 */

import { createHash } from 'node:crypto';
import type { RgbImage } from './ppm.js';

export interface TokenEmbedding {
  /** Row-major (nTokens x width) token features. */
  tokens: Float64Array;
  nTokens: number;
  width: number;
}

export interface LatentOutput {
  /** Channel-major (C x H x W) values. */
  data: Float64Array;
  channels: number;
  height: number;
  width: number;
}

export interface ImageEncoder {
  id: string;
  preprocessing: string;
  encode(image: RgbImage): TokenEmbedding;
}

export interface LatentEncoder {
  id: string;
  preprocessing: string;
  encode(image: RgbImage): LatentOutput;
}

/** Deterministic PRNG so mock encoders are bit-stable across runs. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function seedFromString(text: string): number {
  return createHash('sha256').update(text).digest().readUInt32LE(0);
}

/** Per-patch statistics: channel means, channel variances, two gradients. */
const PATCH_STATS = 8;

function patchStats(image: RgbImage, x0: number, y0: number, size: number): number[] {
  const sums = [0, 0, 0];
  const sqSums = [0, 0, 0];
  let gradX = 0;
  let gradY = 0;
  const n = size * size;
  for (let dy = 0; dy < size; dy++) {
    for (let dx = 0; dx < size; dx++) {
      const p = (y0 + dy) * image.width + (x0 + dx);
      for (let ch = 0; ch < 3; ch++) {
        const v = image.pixels[3 * p + ch];
        sums[ch] += v;
        sqSums[ch] += v * v;
      }
      if (dx + 1 < size) {
        const q = (y0 + dy) * image.width + (x0 + dx + 1);
        gradX += Math.abs(image.pixels[3 * q] - image.pixels[3 * p]);
      }
      if (dy + 1 < size) {
        const q = (y0 + dy + 1) * image.width + (x0 + dx);
        gradY += Math.abs(image.pixels[3 * q] - image.pixels[3 * p]);
      }
    }
  }
  const stats: number[] = [];
  for (let ch = 0; ch < 3; ch++) stats.push(sums[ch] / n);
  for (let ch = 0; ch < 3; ch++) stats.push(sqSums[ch] / n - (sums[ch] / n) ** 2);
  stats.push(gradX / n);
  stats.push(gradY / n);
  return stats;
}

class MockPatchEncoder implements ImageEncoder {
  readonly id: string;
  readonly preprocessing: string;
  private readonly grid: number;
  readonly widthOut: number;
  private readonly projection: Float64Array;

  constructor(grid: number, width: number) {
    this.id = `mock:${grid}x${width}`;
    this.grid = grid;
    this.widthOut = width;
    this.preprocessing = `crop to ${grid}x${grid} patch grid; per-patch channel stats; seeded linear projection to ${width} features`;
    const rand = mulberry32(seedFromString(this.id));
    this.projection = new Float64Array(PATCH_STATS * width);
    for (let i = 0; i < this.projection.length; i++) {
      this.projection[i] = 2 * rand() - 1;
    }
  }

  encode(image: RgbImage): TokenEmbedding {
    const size = Math.floor(Math.min(image.width, image.height) / this.grid);
    if (size < 1) {
      throw new Error(
        `image ${image.width}x${image.height} too small for a ${this.grid}x${this.grid} patch grid`,
      );
    }
    const nTokens = this.grid * this.grid;
    const tokens = new Float64Array(nTokens * this.widthOut);
    for (let gy = 0; gy < this.grid; gy++) {
      for (let gx = 0; gx < this.grid; gx++) {
        const stats = patchStats(image, gx * size, gy * size, size);
        const row = (gy * this.grid + gx) * this.widthOut;
        for (let f = 0; f < this.widthOut; f++) {
          let acc = 0;
          for (let s = 0; s < PATCH_STATS; s++) {
            acc += stats[s] * this.projection[s * this.widthOut + f];
          }
          tokens[row + f] = acc;
        }
      }
    }
    return { tokens, nTokens, width: this.widthOut };
  }
}

class MockVaeEncoder implements LatentEncoder {
  readonly id: string;
  readonly preprocessing: string;
  private readonly channels: number;
  private readonly factor = 8;
  private readonly projection: Float64Array;

  constructor(channels: number) {
    this.id = `mock-vae:${channels}`;
    this.channels = channels;
    this.preprocessing = `8x downsampling; per-cell channel stats; seeded linear map to ${channels} latent channels`;
    const rand = mulberry32(seedFromString(this.id));
    this.projection = new Float64Array(PATCH_STATS * channels);
    for (let i = 0; i < this.projection.length; i++) {
      this.projection[i] = 2 * rand() - 1;
    }
  }

  encode(image: RgbImage): LatentOutput {
    const h = Math.floor(image.height / this.factor);
    const w = Math.floor(image.width / this.factor);
    if (h < 1 || w < 1 || h * w < 2) {
      throw new Error(
        `image ${image.width}x${image.height} too small for ${this.factor}x latent reduction`,
      );
    }
    const data = new Float64Array(this.channels * h * w);
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < w; x++) {
        const stats = patchStats(image, x * this.factor, y * this.factor, this.factor);
        for (let c = 0; c < this.channels; c++) {
          let acc = 0;
          for (let s = 0; s < PATCH_STATS; s++) {
            acc += stats[s] * this.projection[s * this.channels + c];
          }
          data[c * h * w + y * w + x] = acc;
        }
      }
    }
    return { data, channels: this.channels, height: h, width: w };
  }
}

const MOCK_IMAGE_PATTERN = /^mock:(\d+)x(\d+)$/;
const MOCK_VAE_PATTERN = /^mock-vae:(\d+)$/;

export function resolveImageEncoder(id: string): ImageEncoder {
  const mock = id.match(MOCK_IMAGE_PATTERN);
  if (mock) return new MockPatchEncoder(Number(mock[1]), Number(mock[2]));
  if (id.startsWith('clip:')) {
    throw new Error(
      `encoder '${id}' needs a local CLIP runtime and weights, which are not ` +
        `installed; install an ONNX CLIP runtime and point the id at its model ` +
        `directory, or use a 'mock:<grid>x<width>' encoder for plumbing tests`,
    );
  }
  throw new Error(`unknown encoder id '${id}' (expected 'mock:<grid>x<width>' or 'clip:<model>')`);
}

export function resolveLatentEncoder(id: string): LatentEncoder {
  const mock = id.match(MOCK_VAE_PATTERN);
  if (mock) return new MockVaeEncoder(Number(mock[1]));
  if (id.startsWith('vae:')) {
    throw new Error(
      `autoencoder '${id}' needs local weights, which are not installed; ` +
        `use 'mock-vae:<channels>' for plumbing tests`,
    );
  }
  throw new Error(`unknown autoencoder id '${id}' (expected 'mock-vae:<channels>' or 'vae:<model>')`);
}

/** True when a real (non-mock) encoder for this id could actually load. */
export function realEncoderAvailable(id: string): boolean {
  try {
    resolveImageEncoder(id);
    return !id.startsWith('mock');
  } catch {
    return false;
  }
}
