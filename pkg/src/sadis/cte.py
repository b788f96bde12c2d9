"""Color-texture extraction on token embeddings.

The color branch subtracts the grayscale-image embedding from the color-image
embedding, leaving a transferable color vector. The texture branch
concatenates the gray-texture embedding with the embedding of its average
gray, damps the dominant singular values (which carry the shared gray tone),
reconstructs, and keeps the first token block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, NumericalError
from .tensorio import Embedding


@dataclass(frozen=True)
class CteConfig:
    """Knobs for the extraction: singular-value damping rate ``gamma``,
    overall singular-value gain ``beta``, and a gain on the color branch."""

    gamma: float = 0.003
    beta: float = 1.0
    color_scale: float = 1.0

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.beta <= 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")
        if self.color_scale < 0:
            raise DomainError(f"color_scale must be >= 0, got {self.color_scale}")


@dataclass(frozen=True, eq=False)
class StyleCondition:
    """Stacked condition tokens: texture tokens first, color tokens second."""

    tokens: np.ndarray
    n_per_branch: int

    def __post_init__(self):
        tokens = np.ascontiguousarray(np.asarray(self.tokens, dtype=np.float64))
        if tokens.ndim != 2 or tokens.shape[0] != 2 * self.n_per_branch:
            raise DimensionError(
                f"style condition needs exactly 2*{self.n_per_branch} token rows, "
                f"got shape {tokens.shape}"
            )
        if not np.all(np.isfinite(tokens)):
            raise DomainError("style condition contains non-finite values")
        object.__setattr__(self, "tokens", tokens)

    @property
    def texture_tokens(self) -> np.ndarray:
        return self.tokens[: self.n_per_branch]

    @property
    def color_tokens(self) -> np.ndarray:
        return self.tokens[self.n_per_branch :]

    def split(self) -> tuple[Embedding, Embedding]:
        return Embedding(self.texture_tokens), Embedding(self.color_tokens)


def _check_same_shape(a: Embedding, b: Embedding, op: str) -> None:
    if a.tokens.shape != b.tokens.shape:
        raise DimensionError(
            f"{op} needs matching shapes, got {a.tokens.shape} and {b.tokens.shape}"
        )


def extract_color_embedding(
    emb_color: Embedding, emb_gray: Embedding, config: CteConfig = CteConfig()
) -> Embedding:
    """Color branch: ``color_scale * (emb_color - emb_gray)`` elementwise."""
    _check_same_shape(emb_color, emb_gray, "color extraction")
    return Embedding(config.color_scale * (emb_color.tokens - emb_gray.tokens))


def concat_tokens(a: Embedding, b: Embedding) -> Embedding:
    """Stack token rows: rows of ``a`` first, then rows of ``b``."""
    if a.width != b.width:
        raise DimensionError(
            f"token concatenation needs equal feature widths, got {a.width} and {b.width}"
        )
    return Embedding(np.vstack([a.tokens, b.tokens]))


def reweight_singular_values(
    sigma: np.ndarray, config: CteConfig = CteConfig()
) -> np.ndarray:
    """Damp each singular value independently: beta * exp(-gamma * s) * s.

    For huge ``gamma * s`` the exponential underflows to zero gracefully,
    which is the intended limit (no clamping needed).
    """
    s = np.asarray(sigma, dtype=np.float64)
    if s.size and s.min() < 0:
        raise DomainError("singular values must be nonnegative")
    return config.beta * np.exp(-config.gamma * s) * s


def extract_texture_embedding(
    emb_gray_tx: Embedding, emb_avg_gray: Embedding, config: CteConfig = CteConfig()
) -> Embedding:
    """Texture branch: concat, SVD, damp singular values, rebuild, slice.

    With ``gamma=0, beta=1`` the damping is the identity, so the output
    reproduces ``emb_gray_tx`` up to SVD reconstruction error.
    """
    _check_same_shape(emb_gray_tx, emb_avg_gray, "texture extraction")
    stacked = concat_tokens(emb_gray_tx, emb_avg_gray)
    try:
        u, s, vt = np.linalg.svd(stacked.tokens, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        try:
            cond = float(np.linalg.norm(stacked.tokens, 1)) / max(
                float(np.abs(stacked.tokens).sum(axis=0).min()), np.finfo(float).tiny
            )
        except Exception:  # pragma: no cover - estimate is best effort
            cond = float("nan")
        raise NumericalError(
            f"SVD failed to converge (condition estimate ~{cond:.3e})"
        ) from exc
    s_hat = reweight_singular_values(s, config)
    rebuilt = (u * s_hat) @ vt
    return Embedding(rebuilt[: emb_gray_tx.n_tokens, :])


def combine(emb_tx: Embedding, emb_clr: Embedding) -> StyleCondition:
    """Stack texture tokens above color tokens into one condition block."""
    _check_same_shape(emb_tx, emb_clr, "combine")
    stacked = np.vstack([emb_tx.tokens, emb_clr.tokens])
    return StyleCondition(stacked, emb_tx.n_tokens)
