"""Image-domain primitives: grayscale conversion, average-gray flattening,
and 2x box downsampling for multi-scale metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, SizeError
from .tensorio import RgbImage, _require_finite

# ITU-R BT.601 luma weights; they sum to 1 so gray-of-gray is the identity.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Single-channel H x W image with values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.ascontiguousarray(np.asarray(self.pixels, dtype=np.float64))
        if pixels.ndim != 2:
            raise DimensionError(f"gray image must be 2-D (H, W), got shape {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise DimensionError("gray image needs at least one pixel")
        _require_finite(pixels, "gray image")
        if pixels.min() < 0.0 or pixels.max() > 1.0:
            raise DomainError("gray image values must lie in [0, 1]")
        object.__setattr__(self, "pixels", pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def grayscale(image: RgbImage) -> GrayImage:
    """Per-pixel BT.601 luminance: 0.299 R + 0.587 G + 0.114 B."""
    y = image.pixels @ LUMA_WEIGHTS
    return GrayImage(np.clip(y, 0.0, 1.0))


def gray_to_rgb(image: GrayImage) -> RgbImage:
    """Replicate the single channel into R = G = B."""
    return RgbImage(np.repeat(image.pixels[:, :, None], 3, axis=2))


def average_gray(image: GrayImage) -> GrayImage:
    """Uniform image of the input's arithmetic mean, same dimensions.

    Returned full-size (not as a scalar) so it can be fed to an encoder
    exactly like any other image.
    """
    return GrayImage(np.full_like(image.pixels, float(image.pixels.mean())))


def downsample2x(image: RgbImage) -> RgbImage:
    """2x2 box average; trailing odd row/column is dropped."""
    h, w = image.height, image.width
    if h < 2 or w < 2:
        raise SizeError(f"image {h}x{w} is too small to downsample (need >= 2x2)")
    h2, w2 = h // 2, w // 2
    cropped = image.pixels[: 2 * h2, : 2 * w2, :]
    blocks = cropped.reshape(h2, 2, w2, 2, 3)
    return RgbImage(blocks.mean(axis=(1, 3)))
