"""Noise-regularized whitening-coloring transform on channel-major latents.

Whitening decorrelates a latent's channels against its own (unnormalized)
centered gram; coloring imposes a reference latent's gram and mean. The
regularized form adds small seeded Gaussian noise on top, and the step-level
entry point blends the transformed latent with the untouched one and only
fires inside a timestep window.

Conventions: grams are the unnormalized products (z - m)(z - m)^T of the
C x (H*W) flattening; the coloring stage applies the +1/2 power of the
reference eigenvalues (the inverse of the whitening map), which is what
makes the output's gram match the reference gram.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateInputError,
    DegenerateReferenceError,
    DimensionError,
    DomainError,
)
from .tensorio import LatentTensor


@dataclass(frozen=True)
class RegWctConfig:
    """Transform knobs.

    lam        -- scale of the additive Gaussian noise (0 disables it)
    omega      -- blend weight between the untouched and transformed latent
    t_start_frac, t_end_frac -- timestep-fraction window; with t counting
                  down from T, the transform fires while
                  t_end_frac <= t/T <= t_start_frac
    seed       -- default seed for the noise stream when no generator is given
    eig_floor  -- eigenvalues below eig_floor * max eigenvalue are treated
                  as zero (their inverse root is zeroed)
    """

    lam: float = 0.01
    omega: float = 0.5
    t_start_frac: float = 0.8
    t_end_frac: float = 0.6
    seed: int = 0
    eig_floor: float = 1e-8

    def __post_init__(self):
        if self.lam < 0:
            raise DomainError(f"lam must be >= 0, got {self.lam}")
        if not 0.0 <= self.omega <= 1.0:
            raise DomainError(f"omega must lie in [0, 1], got {self.omega}")
        if not 0.0 <= self.t_end_frac < self.t_start_frac <= 1.0:
            raise DomainError(
                "need 0 <= t_end_frac < t_start_frac <= 1, got "
                f"[{self.t_end_frac}, {self.t_start_frac}]"
            )
        if self.eig_floor <= 0:
            raise DomainError(f"eig_floor must be > 0, got {self.eig_floor}")


def channel_moments(z: LatentTensor) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel spatial mean and unnormalized centered gram (C x C)."""
    flat = z.data.reshape(z.channels, -1)
    mean = flat.mean(axis=1)
    centered = flat - mean[:, None]
    return mean, centered @ centered.T


def _clamped_eig_power(gram: np.ndarray, power: float, eig_floor: float) -> np.ndarray:
    """E diag(d^power) E^T with eigenvalues below the relative floor zeroed."""
    eigvals, eigvecs = np.linalg.eigh(gram)
    top = float(eigvals.max(initial=0.0))
    if top <= 0.0:
        return None  # caller decides which degenerate error applies
    keep = eigvals > eig_floor * top
    powered = np.zeros_like(eigvals)
    powered[keep] = eigvals[keep] ** power
    return (eigvecs * powered) @ eigvecs.T


def whiten(z: LatentTensor, config: RegWctConfig = RegWctConfig()) -> LatentTensor:
    """Center by the channel mean and map the centered gram to the identity
    on its non-degenerate eigenspace."""
    mean, gram = channel_moments(z)
    transform = _clamped_eig_power(gram, -0.5, config.eig_floor)
    if transform is None:
        raise DegenerateInputError(
            "latent has zero channel variance; whitening is undefined"
        )
    flat = z.data.reshape(z.channels, -1)
    white = transform @ (flat - mean[:, None])
    return LatentTensor(white.reshape(z.data.shape))


def color(
    z_white: LatentTensor, ref: LatentTensor, config: RegWctConfig = RegWctConfig()
) -> LatentTensor:
    """Impose the reference latent's centered gram and channel mean."""
    if z_white.channels != ref.channels:
        raise DimensionError(
            f"channel mismatch: latent has {z_white.channels}, reference {ref.channels}"
        )
    ref_mean, ref_gram = channel_moments(ref)
    transform = _clamped_eig_power(ref_gram, 0.5, config.eig_floor)
    if transform is None:
        raise DegenerateReferenceError(
            "reference latent has zero channel variance; coloring is undefined"
        )
    flat = z_white.data.reshape(z_white.channels, -1)
    colored = transform @ flat + ref_mean[:, None]
    return LatentTensor(colored.reshape(z_white.data.shape))


def wct(
    z: LatentTensor, ref: LatentTensor, config: RegWctConfig = RegWctConfig()
) -> LatentTensor:
    """Whiten then color: the output carries the reference's gram and mean."""
    return color(whiten(z, config), ref, config)


def reg_wct(
    z: LatentTensor,
    ref: LatentTensor,
    config: RegWctConfig = RegWctConfig(),
    rng: np.random.Generator | None = None,
) -> LatentTensor:
    """WCT plus additive noise ``lam * delta`` with delta ~ N(0, 1).

    With ``lam == 0`` the WCT output is returned bitwise and no draw is
    consumed, so trajectories stay reproducible across noise settings.
    """
    out = wct(z, ref, config)
    if config.lam == 0.0:
        return out
    if rng is None:
        rng = np.random.default_rng(config.seed)
    delta = rng.standard_normal(out.data.shape)
    return LatentTensor(out.data + config.lam * delta)


def in_gate(t: int, total: int, config: RegWctConfig) -> bool:
    """Exact-rational test of t/total against the configured window.

    Using Fractions avoids float-boundary flakiness at window edges like
    0.6 and 0.8; both endpoints are inclusive.
    """
    if total <= 0:
        raise DomainError(f"total step count must be positive, got {total}")
    if not 0 <= t <= total:
        raise DomainError(f"step index {t} outside [0, {total}]")
    frac = Fraction(t, total)
    lo = Fraction(str(config.t_end_frac))
    hi = Fraction(str(config.t_start_frac))
    return lo <= frac <= hi


def blend_step(
    z_prime: LatentTensor,
    ref: LatentTensor,
    t: int,
    total: int,
    config: RegWctConfig = RegWctConfig(),
    rng: np.random.Generator | None = None,
) -> LatentTensor:
    """Gated blend: inside the window return
    ``(1 - omega) * z' + omega * reg_wct(z')``, otherwise z' unchanged.

    Outside the window (or with omega == 0) the input object is returned
    as-is, bitwise untouched, and no random draw is consumed.
    """
    if not in_gate(t, total, config) or config.omega == 0.0:
        return z_prime
    transformed = reg_wct(z_prime, ref, config, rng)
    if config.omega == 1.0:
        return transformed
    return LatentTensor(
        (1.0 - config.omega) * z_prime.data + config.omega * transformed.data
    )
