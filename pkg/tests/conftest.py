"""Shared helpers and independent brute-force oracles for the test suite.

Oracles here deliberately re-derive results with the dumbest possible code
(loops, direct definitions) so they stay independent of the library paths
they check.
"""

from __future__ import annotations

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gram_oracle(data: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Double-loop per-channel mean and unnormalized centered gram."""
    c = data.shape[0]
    flat = data.reshape(c, -1)
    n = flat.shape[1]
    mean = np.array([sum(flat[i]) / n for i in range(c)])
    gram = np.zeros((c, c))
    for i in range(c):
        for j in range(c):
            total = 0.0
            for p in range(n):
                total += (flat[i, p] - mean[i]) * (flat[j, p] - mean[j])
            gram[i, j] = total
    return mean, gram


def chist_oracle(a: np.ndarray, b: np.ndarray, bins: int) -> float:
    """Loop-based per-channel Bhattacharyya sum over RGB histograms."""
    total = 0.0
    for ch in range(3):
        counts_a = [0] * bins
        counts_b = [0] * bins
        for v in a[:, :, ch].ravel():
            counts_a[min(int(v * bins), bins - 1)] += 1
        for v in b[:, :, ch].ravel():
            counts_b[min(int(v * bins), bins - 1)] += 1
        na, nb = a.shape[0] * a.shape[1], b.shape[0] * b.shape[1]
        bc = sum(
            np.sqrt((ca / na) * (cb / nb)) for ca, cb in zip(counts_a, counts_b)
        )
        total += np.sqrt(max(0.0, 1.0 - bc))
    return float(total)


def box_downsample_oracle(img: np.ndarray) -> np.ndarray:
    h2, w2 = img.shape[0] // 2, img.shape[1] // 2
    out = np.zeros((h2, w2, 3))
    for y in range(h2):
        for x in range(w2):
            for ch in range(3):
                out[y, x, ch] = (
                    img[2 * y, 2 * x, ch]
                    + img[2 * y, 2 * x + 1, ch]
                    + img[2 * y + 1, 2 * x, ch]
                    + img[2 * y + 1, 2 * x + 1, ch]
                ) / 4.0
    return out


def swd_oracle(
    a: np.ndarray, b: np.ndarray, directions: np.ndarray, scales: int
) -> float:
    """Direct sort-and-difference sliced Wasserstein over a box pyramid."""
    per_scale = []
    cur_a, cur_b = a, b
    for scale in range(scales):
        if scale > 0:
            cur_a = box_downsample_oracle(cur_a)
            cur_b = box_downsample_oracle(cur_b)
        cloud_a = cur_a.reshape(-1, 3)
        cloud_b = cur_b.reshape(-1, 3)
        m = min(len(cloud_a), len(cloud_b))
        per_dir = []
        for theta in directions:
            theta = theta / np.linalg.norm(theta)
            pa = np.sort(cloud_a @ theta)
            pb = np.sort(cloud_b @ theta)
            if len(pa) != m:
                pa = np.quantile(pa, (np.arange(m) + 0.5) / m)
            if len(pb) != m:
                pb = np.quantile(pb, (np.arange(m) + 0.5) / m)
            per_dir.append(np.abs(pa - pb).mean())
        per_scale.append(np.mean(per_dir))
    return float(np.mean(per_scale))


def radius_grid_oracle(h: int, w: int) -> np.ndarray:
    """Centered-frequency integer radii, derived straight from definitions."""
    radii = np.zeros((h, w), dtype=np.int64)
    for u in range(h):
        for v in range(w):
            uc = u - h if u > h // 2 else u
            vc = v - w if v > w // 2 else v
            radii[u, v] = int(np.rint(np.hypot(uc, vc)))
    return radii
