#!/usr/bin/env node
/**
 * Bridge CLI: export encoder outputs to the core's NPY interchange format.
 *
 * Exit codes: 0 success (including a skipped demo), 2 validation error,
 * 3 I/O error.
 */

import { pathToFileURL } from 'node:url';
import { parseArgs } from 'node:util';
import { realEncoderAvailable } from './encoders.js';
import { exportEmbedding, exportLatent } from './exporter.js';

function usage(): string {
  return [
    'usage: sadis-bridge <command> [options]',
    '',
    'commands:',
    '  export-embedding --image <ppm> --encoder <id> --out <npy> [--grayscale] [--precision f32|f64]',
    '  export-latent    --image <ppm> --autoencoder <id> --out <npy> [--precision f32|f64]',
    '  demo             --encoder <id>',
    '',
    "encoder ids: 'mock:<grid>x<width>' (deterministic, weight-free),",
    "             'clip:<model>' / 'vae:<model>' (need local weights).",
  ].join('\n');
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === 'export-embedding') {
      const { values } = parseArgs({
        args: rest,
        options: {
          image: { type: 'string' },
          encoder: { type: 'string' },
          out: { type: 'string' },
          grayscale: { type: 'boolean', default: false },
          precision: { type: 'string', default: 'f32' },
        },
      });
      if (!values.image || !values.encoder || !values.out) {
        throw new Error('export-embedding needs --image, --encoder, and --out');
      }
      const manifest = exportEmbedding(values.image, values.encoder, values.out, {
        grayscale: values.grayscale,
        precision: values.precision as 'f32' | 'f64',
      });
      console.log(JSON.stringify(manifest));
      return 0;
    }
    if (command === 'export-latent') {
      const { values } = parseArgs({
        args: rest,
        options: {
          image: { type: 'string' },
          autoencoder: { type: 'string' },
          out: { type: 'string' },
          precision: { type: 'string', default: 'f32' },
        },
      });
      if (!values.image || !values.autoencoder || !values.out) {
        throw new Error('export-latent needs --image, --autoencoder, and --out');
      }
      const manifest = exportLatent(values.image, values.autoencoder, values.out, {
        precision: values.precision as 'f32' | 'f64',
      });
      console.log(JSON.stringify(manifest));
      return 0;
    }
    if (command === 'demo') {
      const { values } = parseArgs({
        args: rest,
        options: { encoder: { type: 'string', default: 'clip:base' } },
      });
      if (!realEncoderAvailable(values.encoder!)) {
        console.error(
          `demo skipped: encoder '${values.encoder}' has no local weights in this environment`,
        );
        return 0;
      }
      console.error('demo: real-weights path not implemented in this environment');
      return 2;
    }
    console.error(usage());
    return command === undefined || command === '--help' || command === '-h' ? 0 : 2;
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    const isIo = /ENOENT|EACCES|EISDIR|no such file/i.test(message);
    console.error(`error: ${message}`);
    return isIo ? 3 : 2;
  }
}

const entry = process.argv[1] ? pathToFileURL(process.argv[1]).href : '';
if (import.meta.url === entry) {
  process.exit(main(process.argv.slice(2)));
}
