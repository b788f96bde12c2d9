"""Bit-exact tensor and image interchange.

NPY v1.0 read/write for embeddings and latents, PNG/PPM read/write for
images, and the three validated container types the rest of the library
passes around. Working precision is float64 regardless of file dtype;
files default to float32 on write for compatibility.
"""

from __future__ import annotations

import ast
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    DimensionError,
    DomainError,
    FormatError,
    UnsupportedDtypeError,
    UnsupportedFormatError,
    UnsupportedLayoutError,
)

_NPY_MAGIC = b"\x93NUMPY"
_NPY_DESCRS = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}
_HEADER_ALIGN = 64


def _require_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} contains non-finite values (NaN or Inf)")


@dataclass(frozen=True, eq=False)
class Embedding:
    """Token matrix of shape (n_t, c): one image-encoder token per row."""

    tokens: np.ndarray

    def __post_init__(self):
        tokens = np.ascontiguousarray(np.asarray(self.tokens, dtype=np.float64))
        if tokens.ndim != 2:
            raise DimensionError(f"embedding must be 2-D (n_t, c), got shape {tokens.shape}")
        if tokens.shape[0] < 1 or tokens.shape[1] < 1:
            raise DimensionError(f"embedding needs n_t >= 1 and c >= 1, got shape {tokens.shape}")
        _require_finite(tokens, "embedding")
        object.__setattr__(self, "tokens", tokens)

    @property
    def n_tokens(self) -> int:
        return self.tokens.shape[0]

    @property
    def width(self) -> int:
        return self.tokens.shape[1]


@dataclass(frozen=True, eq=False)
class LatentTensor:
    """Channel-major latent of shape (C, H, W)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if data.ndim != 3:
            raise DimensionError(f"latent must be 3-D (C, H, W), got shape {data.shape}")
        c, h, w = data.shape
        if c < 1:
            raise DimensionError("latent needs at least one channel")
        if h * w < 2:
            raise DimensionError("latent needs H*W >= 2 so mean-centering is meaningful")
        _require_finite(data, "latent")
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True, eq=False)
class RgbImage:
    """H x W x 3 color image with channel values in [0, 1].

    Values are clamped into [0, 1] on construction, matching loader
    behavior; non-finite input is rejected rather than clamped.
    """

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.ascontiguousarray(np.asarray(self.pixels, dtype=np.float64))
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise DimensionError(f"image must have shape (H, W, 3), got {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise DimensionError("image needs at least one pixel")
        _require_finite(pixels, "image")
        object.__setattr__(self, "pixels", np.clip(pixels, 0.0, 1.0))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


# ---------------------------------------------------------------------------
# NPY v1.0
# ---------------------------------------------------------------------------


def read_npy(path) -> np.ndarray:
    """Read an NPY v1.0 file into a float64 C-order array.

    Only little-endian float32/float64 payloads in C order are accepted;
    anything else raises a typed error naming the offending header field.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 10 or raw[:6] != _NPY_MAGIC:
        raise FormatError("not an NPY file: bad magic bytes")
    major, minor = raw[6], raw[7]
    if (major, minor) != (1, 0):
        raise FormatError(f"unsupported NPY version {major}.{minor}; only 1.0 is handled")
    (header_len,) = struct.unpack("<H", raw[8:10])
    header_end = 10 + header_len
    if len(raw) < header_end:
        raise FormatError("truncated NPY header")
    try:
        header = ast.literal_eval(raw[10:header_end].decode("latin1").strip())
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"unparseable NPY header dict: {exc}") from exc
    if not isinstance(header, dict):
        raise FormatError("NPY header is not a dict literal")
    for key in ("descr", "fortran_order", "shape"):
        if key not in header:
            raise FormatError(f"NPY header missing field '{key}'")
    descr = header["descr"]
    if descr not in _NPY_DESCRS:
        raise UnsupportedDtypeError(
            f"unsupported dtype descr {descr!r}; only '<f4' and '<f8' are handled"
        )
    if header["fortran_order"] is not False:
        raise UnsupportedLayoutError("fortran_order=True layouts are not supported")
    shape = header["shape"]
    if not isinstance(shape, tuple) or not all(
        isinstance(n, int) and n >= 0 for n in shape
    ):
        raise FormatError(f"invalid shape field {shape!r} in NPY header")
    dtype = _NPY_DESCRS[descr]
    count = int(np.prod(shape, dtype=np.int64)) if shape else 1
    expected = count * dtype.itemsize
    data = raw[header_end:]
    if len(data) != expected:
        raise FormatError(
            f"NPY data section has {len(data)} bytes, header shape {shape} needs {expected}"
        )
    arr = np.frombuffer(data, dtype=dtype).reshape(shape).astype(np.float64)
    _require_finite(arr, f"array from {path}")
    return np.ascontiguousarray(arr)


def write_npy(path, tensor: np.ndarray, precision: str = "f32") -> None:
    """Write a float array as NPY v1.0, little-endian, C order.

    ``precision`` selects the on-disk dtype ('f32' or 'f64'); the header
    is padded to a 64-byte boundary per the NPY format description.
    """
    arr = np.asarray(tensor, dtype=np.float64)
    if arr.ndim == 0:
        raise DimensionError("scalar (rank-0) tensors cannot be written; reshape to (1,)")
    _require_finite(arr, "tensor")
    if precision == "f32":
        out = arr.astype("<f4")
        descr = "<f4"
    elif precision == "f64":
        out = arr.astype("<f8")
        descr = "<f8"
    else:
        raise DomainError(f"precision must be 'f32' or 'f64', got {precision!r}")
    shape_repr = str(arr.shape) if arr.ndim != 1 else f"({arr.shape[0]},)"
    header = f"{{'descr': '{descr}', 'fortran_order': False, 'shape': {shape_repr}, }}"
    base = len(_NPY_MAGIC) + 2 + 2
    pad = _HEADER_ALIGN - ((base + len(header) + 1) % _HEADER_ALIGN)
    pad = 0 if pad == _HEADER_ALIGN else pad
    header_bytes = (header + " " * pad + "\n").encode("latin1")
    with open(path, "wb") as fh:
        fh.write(_NPY_MAGIC)
        fh.write(bytes((1, 0)))
        fh.write(struct.pack("<H", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(np.ascontiguousarray(out).tobytes())


def read_embedding(path) -> Embedding:
    return Embedding(read_npy(path))


def read_latent(path) -> LatentTensor:
    return LatentTensor(read_npy(path))


# ---------------------------------------------------------------------------
# PNG / PPM
# ---------------------------------------------------------------------------


def _read_ppm(raw: bytes, path) -> RgbImage:
    # P6 header: magic, width, height, maxval, single whitespace, then samples.
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"truncated PPM header in {path}")
        fields.append(raw[start:pos])
    pos += 1  # single whitespace byte after maxval
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise FormatError(f"non-numeric PPM header field in {path}: {exc}") from exc
    if maxval != 255:
        raise UnsupportedFormatError(f"PPM maxval {maxval} unsupported; only 8-bit (255)")
    if width < 1 or height < 1:
        raise FormatError(f"bad PPM dimensions {width}x{height}")
    need = width * height * 3
    data = raw[pos : pos + need]
    if len(data) != need:
        raise FormatError(f"PPM data section has {len(data)} bytes, expected {need}")
    arr = np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3)
    return RgbImage(arr.astype(np.float64) / 255.0)


def read_image(path) -> RgbImage:
    """Read an 8-bit PNG (RGB/RGBA, alpha dropped) or binary PPM (P6)."""
    raw = Path(path).read_bytes()
    if raw[:2] == b"P6":
        return _read_ppm(raw, path)
    if raw[:8] == b"\x89PNG\r\n\x1a\n":
        with Image.open(path) as img:
            if img.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise UnsupportedFormatError(
                    f"PNG mode {img.mode} (>8-bit) unsupported; only 8-bit RGB/RGBA"
                )
            if img.mode == "RGBA":
                img = img.convert("RGB")
            if img.mode != "RGB":
                raise UnsupportedFormatError(
                    f"PNG mode {img.mode} unsupported; only 8-bit RGB/RGBA"
                )
            arr = np.asarray(img, dtype=np.uint8)
    else:
        raise UnsupportedFormatError(f"{path} is neither a PNG nor a binary (P6) PPM")
    return RgbImage(arr.astype(np.float64) / 255.0)


def quantize_u8(image: RgbImage) -> np.ndarray:
    """Map [0,1] floats to 8-bit by round-half-up; this is the write rule."""
    return np.floor(image.pixels * 255.0 + 0.5).astype(np.uint8)


def write_image(path, image: RgbImage) -> None:
    """Write an RgbImage as PNG or binary PPM, chosen by file extension."""
    u8 = quantize_u8(image)
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        Image.fromarray(u8, mode="RGB").save(path, format="PNG")
    elif suffix in (".ppm", ".pnm"):
        header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(u8.tobytes())
    else:
        raise UnsupportedFormatError(f"cannot infer image format from suffix {suffix!r}")
