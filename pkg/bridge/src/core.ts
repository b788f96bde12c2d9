/**
 * Invocation of the core CLI. The bridge never reimplements math the core
 * owns; color/texture extraction and latent transforms go through the
 * installed `sadis` binary, exchanging NPY files.
 */

import { spawnSync } from 'node:child_process';

export interface CoreResult {
  ok: boolean;
  exitCode: number | null;
  stdout: string;
  stderr: string;
}

export function runCore(args: string[], binary = 'sadis'): CoreResult {
  const proc = spawnSync(binary, args, { encoding: 'utf8' });
  if (proc.error) {
    return { ok: false, exitCode: null, stdout: '', stderr: String(proc.error) };
  }
  return {
    ok: proc.status === 0,
    exitCode: proc.status,
    stdout: proc.stdout ?? '',
    stderr: proc.stderr ?? '',
  };
}

export function coreAvailable(binary = 'sadis'): boolean {
  const probe = spawnSync(binary, ['--help'], { encoding: 'utf8' });
  return !probe.error && probe.status === 0;
}
