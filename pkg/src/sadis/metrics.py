"""Color and frequency diagnostics.

Conventions, since published numbers for these metrics vary by convention:

* C-Hist sums the per-channel Bhattacharyya distances sqrt(1 - BC) over
  R, G, B, so its range is [0, 3].
* The sliced Wasserstein color distance operates on raw RGB pixel clouds
  over a box-downsampled pyramid; it is a documented variant, not a
  reproduction of any external implementation.
* The radial spectrum uses a direct (matrix-form) DFT; intended sizes are
  <= 64 x 64, where correctness beats speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateReferenceError,
    DimensionError,
    DomainError,
    SizeError,
)
from .imageops import downsample2x
from .regwct import channel_moments
from .tensorio import LatentTensor, RgbImage


@dataclass(frozen=True, eq=False)
class HistogramSet:
    """Per-channel probability histograms of an RGB image."""

    bins_per_channel: int
    hist_r: np.ndarray
    hist_g: np.ndarray
    hist_b: np.ndarray

    def channels(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.hist_r, self.hist_g, self.hist_b


@dataclass(frozen=True, eq=False)
class SpectrumProfile:
    """Mean spectral power per integer radius band."""

    radial_bins: np.ndarray
    max_radius: int


def rgb_histograms(image: RgbImage, bins: int = 256) -> HistogramSet:
    """Normalized per-channel histograms; value v lands in bin
    min(floor(v * bins), bins - 1)."""
    if bins < 2:
        raise DomainError(f"need at least 2 bins, got {bins}")
    idx = np.minimum((image.pixels * bins).astype(np.int64), bins - 1)
    n = image.height * image.width
    hists = []
    for ch in range(3):
        counts = np.bincount(idx[:, :, ch].ravel(), minlength=bins).astype(np.float64)
        hists.append(counts / n)
    return HistogramSet(bins, *hists)


def chist_distance(a: RgbImage, b: RgbImage, bins: int = 256) -> float:
    """Summed per-channel Bhattacharyya distance between RGB histograms."""
    ha = rgb_histograms(a, bins)
    hb = rgb_histograms(b, bins)
    total = 0.0
    for pa, pb in zip(ha.channels(), hb.channels()):
        bc = float(np.sqrt(pa * pb).sum())
        total += float(np.sqrt(max(0.0, 1.0 - bc)))
    return total


def _resample_sorted(sorted_vals: np.ndarray, count: int) -> np.ndarray:
    """Quantile-resample an ascending value list to ``count`` points."""
    if sorted_vals.size == count:
        return sorted_vals
    q = (np.arange(count) + 0.5) / count
    return np.quantile(sorted_vals, q)


def sliced_w1(cloud_a: np.ndarray, cloud_b: np.ndarray, directions: np.ndarray) -> float:
    """Mean 1-D Wasserstein-1 distance over the given unit directions.

    Clouds of unequal size are matched by quantile-resampling the larger
    one down to the smaller count.
    """
    m = min(cloud_a.shape[0], cloud_b.shape[0])
    total = 0.0
    for theta in directions:
        pa = np.sort(cloud_a @ theta)
        pb = np.sort(cloud_b @ theta)
        total += float(np.abs(_resample_sorted(pa, m) - _resample_sorted(pb, m)).mean())
    return total / directions.shape[0]


def swd_color_distance(
    a: RgbImage,
    b: RgbImage,
    projections: int = 64,
    scales: int = 3,
    seed: int = 0,
    directions: np.ndarray | None = None,
) -> float:
    """Multi-scale sliced Wasserstein distance between RGB pixel clouds.

    One set of seeded random unit directions is drawn per call and reused
    at every pyramid scale; ``directions`` overrides the draw (rows are
    normalized here).
    """
    if projections < 1 or scales < 1:
        raise DomainError("projections and scales must both be >= 1")
    need = 2 ** (scales - 1)
    if min(a.height, a.width) < need or min(b.height, b.width) < need:
        raise SizeError(
            f"images too small for {scales} pyramid scales (need >= {need} per side)"
        )
    if directions is None:
        rng = np.random.default_rng(seed)
        directions = rng.standard_normal((projections, 3))
    else:
        directions = np.asarray(directions, dtype=np.float64)
        if directions.shape != (projections, 3):
            raise DimensionError(
                f"directions must have shape ({projections}, 3), got {directions.shape}"
            )
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms < 1e-12] = 1.0
    directions = directions / norms

    total = 0.0
    cur_a, cur_b = a, b
    for scale in range(scales):
        if scale > 0:
            cur_a = downsample2x(cur_a)
            cur_b = downsample2x(cur_b)
        cloud_a = cur_a.pixels.reshape(-1, 3)
        cloud_b = cur_b.pixels.reshape(-1, 3)
        total += sliced_w1(cloud_a, cloud_b, directions)
    return total / scales


def normalized_covariance(z: LatentTensor) -> np.ndarray:
    """Centered channel covariance (z - m)(z - m)^T / (H*W - 1)."""
    _, gram = channel_moments(z)
    return gram / (z.height * z.width - 1)


def covariance_distance(a: LatentTensor, b: LatentTensor) -> float:
    """Relative Frobenius distance between normalized centered covariances."""
    if a.channels != b.channels:
        raise DimensionError(
            f"channel mismatch: {a.channels} vs {b.channels}"
        )
    cov_a = normalized_covariance(a)
    cov_b = normalized_covariance(b)
    denom = float(np.linalg.norm(cov_b))
    if denom == 0.0:
        raise DegenerateReferenceError("second latent has zero variance")
    return float(np.linalg.norm(cov_a - cov_b)) / denom


def _centered_radii(h: int, w: int) -> np.ndarray:
    u = ((np.arange(h) + h // 2) % h) - h // 2
    v = ((np.arange(w) + w // 2) % w) - w // 2
    return np.rint(np.sqrt(u[:, None] ** 2 + v[None, :] ** 2)).astype(np.int64)


def radial_spectrum(z: np.ndarray) -> SpectrumProfile:
    """Mean DFT power per integer radius band of centered frequencies.

    Uses an explicit DFT-matrix product (direct summation) rather than an
    FFT; exact at the sizes this library targets.
    """
    arr = np.asarray(z, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"radial_spectrum needs a 2-D array, got shape {arr.shape}")
    h, w = arr.shape
    if h < 2 or w < 2:
        raise SizeError(f"array {h}x{w} too small; need at least 2x2")
    fy = np.exp(-2j * np.pi * np.outer(np.arange(h), np.arange(h)) / h)
    fx = np.exp(-2j * np.pi * np.outer(np.arange(w), np.arange(w)) / w)
    spectrum = fy @ arr @ fx.T
    power = np.abs(spectrum) ** 2
    radii = _centered_radii(h, w)
    max_radius = int(radii.max())
    sums = np.bincount(radii.ravel(), weights=power.ravel(), minlength=max_radius + 1)
    counts = np.bincount(radii.ravel(), minlength=max_radius + 1)
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    return SpectrumProfile(means, max_radius)


def spectrum_gap(a: SpectrumProfile, b: SpectrumProfile) -> float:
    """Mean absolute difference of log(1 + power) across radius bins."""
    if a.radial_bins.shape != b.radial_bins.shape:
        raise DimensionError(
            f"profile length mismatch: {a.radial_bins.shape} vs {b.radial_bins.shape}"
        )
    return float(np.abs(np.log1p(a.radial_bins) - np.log1p(b.radial_bins)).mean())
