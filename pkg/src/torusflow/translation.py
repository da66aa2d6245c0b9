"""Directional derivative of the solution operator along translation families.

Shifting a solution and boosting it, U(t, x, a) = u(t, x - a t) + a, is again
a solution for any constant vector a.  Differentiating in a_m at a = 0 gives

    dU/da_m = e_m + sum_k (-i k_m t) u_k e^{i k.x},

whose graded norms obey the closed identity

    sum_m ||dU/da_m||_n^2 = d (2pi)^d + t^2 (||u||_{n+1}^2 - ||u||_0^2).

This module computes the derivative, evaluates both sides of the identity,
and runs truncation scans on power-law tail spectra: a field with
|u_k| ~ (1+|k|)^{-s} lies in H^n for s > n + d/2 and outside H^{n+1} for
s <= n + 1 + d/2, so at the borderline exponent the right-hand side grows
like log K and the scan exhibits the divergence as a trend in K.

Note the scans apply the identity to static coefficient profiles.  The
identity holds for any field at fixed t, which is all the scan needs; no
rough field is actually evolved here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    BOX_MEASURE,
    DIM,
    SpectralField,
    sobolev_norm,
    wavenumbers,
)


def translation_derivative(u: SpectralField, t: float, axis: int) -> SpectralField:
    """d/da_m of the shifted-and-boosted family at a = 0 (axis is 0-based).

    Every coefficient becomes (-i k_m t) u_k; the boost contributes a unit
    k = 0 coefficient in component `axis`.
    """
    if not u.is_vector:
        raise ValueError("expected vector field")
    if axis not in (0, 1):
        raise ValueError("axis must be 0 or 1")
    K = u.trunc
    k1, k2, _ = wavenumbers(K)
    km = k1 if axis == 0 else k2
    c = (-1j * km * t) * u.coeffs
    c[axis, K, K] += 1.0
    return SpectralField(c)


def translation_derivative_normsq_total(u: SpectralField, n: int, t: float) -> float:
    """Closed form d (2pi)^d + t^2 (||u||_{n+1}^2 - ||u||_0^2)."""
    hi = sobolev_norm(u, n + 1)
    lo = sobolev_norm(u, 0)
    return DIM * BOX_MEASURE + t * t * (hi * hi - lo * lo)


def translation_derivative_normsq_direct(u: SpectralField, n: int, t: float) -> float:
    """Independent path: sum over axes of the derivative's H^n norm squared."""
    total = 0.0
    for axis in range(DIM):
        v = sobolev_norm(translation_derivative(u, t, axis), n)
        total += v * v
    return total


@dataclass(frozen=True)
class TailSpectrumSpec:
    """Power-law coefficient profile |u_k| = amplitude (1+|k|)^{-decay}."""

    decay: float
    trunc: int
    amplitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.decay <= 0:
            raise ValueError("decay exponent must be positive")
        if self.trunc < 1:
            raise ValueError("truncation must be >= 1")


def tail_spectrum_field(spec: TailSpectrumSpec, trunc: int | None = None) -> SpectralField:
    """Divergence-free velocity field realizing the tail spectrum.

    Each mode k != 0 carries amplitude (1+|k|)^{-decay} along the transverse
    unit direction (-k2, k1)/|k| with a seeded random phase, so the vector
    magnitude |u_k| is exactly the prescribed profile and k . u_k = 0.
    """
    K = spec.trunc if trunc is None else trunc
    rng = np.random.default_rng(spec.seed)
    n = 2 * K + 1
    phases = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, (n, n)))
    k1, k2, ksq = wavenumbers(K)
    r = np.sqrt(ksq)
    inv_r = np.zeros_like(r)
    nz = r > 0
    inv_r[nz] = 1.0 / r[nz]
    amp = spec.amplitude * (1.0 + r) ** (-spec.decay)
    c = np.stack([amp * phases * (-k2 * inv_r), amp * phases * (k1 * inv_r)])
    canonical = (k1 > 0) | ((k1 == 0) & (k2 > 0))
    mirrored = np.conj(c[:, ::-1, ::-1])
    c = np.where(canonical[None, :, :], c, mirrored)
    c[:, K, K] = 0.0
    return SpectralField(c)


@dataclass(frozen=True)
class ScanRow:
    trunc: int
    norm_total: float
    normsq_increment_per_lnk: float  # nan on the first row


def divergence_scan(spec: TailSpectrumSpec, n: int, t: float, truncations) -> list[ScanRow]:
    """Total derivative norm vs truncation K for a fixed tail spectrum.

    For a borderline spectrum (decay = n + 1 + d/2) the squared norm grows
    by a roughly constant increment per factor of K; for faster decay the
    increments die out (the norm saturates).  Rejects a non-increasing K
    list.
    """
    ks = [int(k) for k in truncations]
    if any(b <= a for a, b in zip(ks, ks[1:])) or not ks:
        raise ValueError("truncation list must be strictly increasing")
    rows: list[ScanRow] = []
    prev_sq = None
    prev_k = None
    for K in ks:
        u = tail_spectrum_field(spec, trunc=K)
        total_sq = translation_derivative_normsq_total(u, n, t)
        if prev_sq is None:
            inc = float("nan")
        else:
            inc = (total_sq - prev_sq) / (math.log(K) - math.log(prev_k))
        rows.append(ScanRow(K, math.sqrt(total_sq), inc))
        prev_sq, prev_k = total_sq, K
    return rows
