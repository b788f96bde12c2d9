/**
 * Export operations: image -> token-embedding NPY, image -> latent NPY,
 * each with a manifest JSON recorded alongside the tensor file.
 */

import { writeFileSync } from 'node:fs';
import { resolveImageEncoder, resolveLatentEncoder } from './encoders.js';
import { writeNpy } from './npy.js';
import { readPpm, toGrayscale } from './ppm.js';

export interface ExportManifest {
  source_image: string;
  encoder: string;
  output: string;
  token_shape: number[];
  preprocessing: string;
}

function writeManifest(manifest: ExportManifest): string {
  const path = `${manifest.output}.manifest.json`;
  writeFileSync(path, JSON.stringify(manifest, Object.keys(manifest).sort(), 2) + '\n');
  return path;
}

export interface ExportOptions {
  /** Convert to grayscale (core's BT.601 weights) before encoding. */
  grayscale?: boolean;
  precision?: 'f32' | 'f64';
}

export function exportEmbedding(
  imagePath: string,
  encoderId: string,
  outPath: string,
  options: ExportOptions = {},
): ExportManifest {
  const encoder = resolveImageEncoder(encoderId);
  let image = readPpm(imagePath);
  let preprocessing = encoder.preprocessing;
  if (options.grayscale) {
    image = toGrayscale(image);
    preprocessing = `BT.601 grayscale; ${preprocessing}`;
  }
  const emb = encoder.encode(image);
  writeNpy(
    outPath,
    { shape: [emb.nTokens, emb.width], data: emb.tokens },
    options.precision ?? 'f32',
  );
  const manifest: ExportManifest = {
    source_image: imagePath,
    encoder: encoderId,
    output: outPath,
    token_shape: [emb.nTokens, emb.width],
    preprocessing,
  };
  writeManifest(manifest);
  return manifest;
}

export function exportLatent(
  imagePath: string,
  autoencoderId: string,
  outPath: string,
  options: ExportOptions = {},
): ExportManifest {
  const encoder = resolveLatentEncoder(autoencoderId);
  const image = readPpm(imagePath);
  const latent = encoder.encode(image);
  writeNpy(
    outPath,
    { shape: [latent.channels, latent.height, latent.width], data: latent.data },
    options.precision ?? 'f32',
  );
  const manifest: ExportManifest = {
    source_image: imagePath,
    encoder: autoencoderId,
    output: outPath,
    token_shape: [latent.channels, latent.height, latent.width],
    preprocessing: encoder.preprocessing,
  };
  writeManifest(manifest);
  return manifest;
}
