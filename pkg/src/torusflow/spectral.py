"""Truncated Fourier fields on the periodic box [0, 2pi]^2.

Everything downstream (solver, tangent dynamics, diagnostics) works with
coefficient arrays for modes k in [-K, K]^2, stored as full complex arrays
with the reality constraint u_{-k} = conj(u_k) maintained explicitly.

Norm convention used across the package:

    ||u||_n^2 = (2pi)^2 * sum_k ( sum_{j=0..n} |k|^{2j} ) * |u_k|^2

with |u_k|^2 summed over vector components.  The grading is inhomogeneous,
so at k = 0 the weight is exactly 1 for every n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DIM = 2
BOX_MEASURE = (2.0 * math.pi) ** DIM

# tolerance used when rejecting ill-posed inputs (e.g. nonzero mean vorticity)
MEAN_TOL = 1e-12


@lru_cache(maxsize=None)
def wavenumbers(trunc: int):
    """Return (k1, k2, |k|^2) meshes of shape (2K+1, 2K+1), axis 0 = k1."""
    k = np.arange(-trunc, trunc + 1)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    ksq = (k1 * k1 + k2 * k2).astype(float)
    for a in (k1, k2, ksq):
        a.setflags(write=False)
    return k1, k2, ksq


@lru_cache(maxsize=None)
def sobolev_weights(trunc: int, n: int) -> np.ndarray:
    """Grading sum_{j=0..n} |k|^{2j} on the coefficient grid."""
    if n < 0:
        raise ValueError("Sobolev index must be >= 0")
    _, _, ksq = wavenumbers(trunc)
    w = np.ones_like(ksq)
    p = np.ones_like(ksq)
    for _ in range(n):
        p = p * ksq
        w = w + p
    w.setflags(write=False)
    return w


def dealias_cutoff(trunc: int) -> int:
    """Largest mode kept by the 2/3-rule mask for truncation K."""
    return (2 * trunc) // 3


@lru_cache(maxsize=None)
def dealias_mask(trunc: int) -> np.ndarray:
    kc = dealias_cutoff(trunc)
    k1, k2, _ = wavenumbers(trunc)
    m = (np.abs(k1) <= kc) & (np.abs(k2) <= kc)
    m.setflags(write=False)
    return m


def _fast_grid_size(minimum: int) -> int:
    """Smallest 5-smooth integer >= minimum (decent FFT performance)."""
    m = minimum
    while True:
        r = m
        for p in (2, 3, 5):
            while r % p == 0:
                r //= p
        if r == 1:
            return m
        m += 1


@dataclass(frozen=True)
class SpectralField:
    """Immutable coefficient array for a scalar or 2-component field.

    coeffs has shape (2K+1, 2K+1) for scalars and (2, 2K+1, 2K+1) for
    vectors; entry [.., i1, i2] is the coefficient of e^{i k.x} with
    k = (i1 - K, i2 - K).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128, copy=True, order="C")
        if c.ndim == 2:
            n1, n2 = c.shape
        elif c.ndim == 3:
            if c.shape[0] != DIM:
                raise ValueError("vector field needs exactly 2 components")
            _, n1, n2 = c.shape
        else:
            raise ValueError("coeffs must be 2-D (scalar) or 3-D (vector)")
        if n1 != n2 or n1 % 2 != 1:
            raise ValueError("coefficient grid must be square with odd side 2K+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- basic introspection -------------------------------------------------

    @property
    def trunc(self) -> int:
        return (self.coeffs.shape[-1] - 1) // 2

    @property
    def is_vector(self) -> bool:
        return self.coeffs.ndim == 3

    def component(self, i: int) -> np.ndarray:
        return self.coeffs[i] if self.is_vector else self.coeffs

    def coeff(self, k1: int, k2: int, component: int | None = None):
        """Coefficient at mode (k1, k2); component index for vector fields."""
        K = self.trunc
        if abs(k1) > K or abs(k2) > K:
            raise IndexError("mode outside truncation")
        if self.is_vector:
            if component is None:
                return self.coeffs[:, k1 + K, k2 + K].copy()
            return complex(self.coeffs[component, k1 + K, k2 + K])
        return complex(self.coeffs[k1 + K, k2 + K])

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zeros(trunc: int, vector: bool = False) -> "SpectralField":
        n = 2 * trunc + 1
        shape = (DIM, n, n) if vector else (n, n)
        return SpectralField(np.zeros(shape, dtype=np.complex128))

    @staticmethod
    def from_modes(trunc: int, modes: dict, vector: bool = False) -> "SpectralField":
        """Build a field from {(k1, k2): value} with reality enforced.

        For each listed mode the conjugate entry at -k is set automatically;
        vector values are 2-tuples.
        """
        n = 2 * trunc + 1
        c = np.zeros((DIM, n, n) if vector else (n, n), dtype=np.complex128)
        for (k1, k2), val in modes.items():
            i1, i2 = k1 + trunc, k2 + trunc
            j1, j2 = -k1 + trunc, -k2 + trunc
            if vector:
                v = np.asarray(val, dtype=np.complex128)
                c[:, i1, i2] = v
                c[:, j1, j2] = np.conj(v)
            else:
                c[i1, i2] = val
                c[j1, j2] = np.conj(val)
        return SpectralField(c)

    # -- algebra -------------------------------------------------------------

    def _binary(self, other, op):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.coeffs.shape != self.coeffs.shape:
            raise ValueError("field shape mismatch")
        return SpectralField(op(self.coeffs, other.coeffs))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex)):
            return SpectralField(self.coeffs * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __neg__(self):
        return SpectralField(-self.coeffs)

    # -- invariant probes ----------------------------------------------------

    def reality_error(self) -> float:
        """Max |u_k - conj(u_{-k})|; zero for a real-valued field."""
        flipped = np.conj(self.coeffs[..., ::-1, ::-1])
        return float(np.max(np.abs(self.coeffs - flipped))) if self.coeffs.size else 0.0

    def divergence_error(self) -> float:
        """Max |k . u_k| over modes (vector fields only)."""
        if not self.is_vector:
            raise ValueError("divergence is defined for vector fields")
        k1, k2, _ = wavenumbers(self.trunc)
        div = k1 * self.coeffs[0] + k2 * self.coeffs[1]
        return float(np.max(np.abs(div)))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))


# ---------------------------------------------------------------------------
# norms and inner products
# ---------------------------------------------------------------------------


def sobolev_norm(field: SpectralField, n: int) -> float:
    """Graded spectral norm of order n (see module docstring for convention)."""
    w = sobolev_weights(field.trunc, n)
    mag2 = np.abs(field.coeffs) ** 2
    if field.is_vector:
        mag2 = mag2.sum(axis=0)
    return math.sqrt(BOX_MEASURE * float(np.sum(w * mag2)))


def l2_inner_product(f: SpectralField, g: SpectralField) -> float:
    """Real L^2 inner product (2pi)^2 Re sum_k conj(f_k) . g_k."""
    if f.coeffs.shape != g.coeffs.shape:
        raise ValueError("field shape mismatch")
    return BOX_MEASURE * float(np.real(np.sum(np.conj(f.coeffs) * g.coeffs)))


# ---------------------------------------------------------------------------
# vorticity / velocity / projection
# ---------------------------------------------------------------------------


def velocity_from_vorticity(
    omega: SpectralField, mean_flow: tuple[float, float] = (0.0, 0.0)
) -> SpectralField:
    """Divergence-free velocity with curl omega on the torus.

    Inverts omega = -Lap(psi) and takes u = (d psi/dx2, -d psi/dx1).  The
    k = 0 velocity mode is not determined by omega; it is set from
    mean_flow.  A nonzero mean vorticity coefficient is rejected (no
    periodic velocity field has one).
    """
    if omega.is_vector:
        raise ValueError("expected scalar vorticity field")
    K = omega.trunc
    mean = abs(omega.coeffs[K, K])
    if mean > MEAN_TOL * max(1.0, omega.max_abs()):
        raise ValueError(
            f"nonzero mean vorticity ({mean:.3e}) cannot be inverted on the torus"
        )
    k1, k2, ksq = wavenumbers(K)
    inv = np.zeros_like(ksq)
    nz = ksq > 0
    inv[nz] = 1.0 / ksq[nz]
    psi = omega.coeffs * inv
    u = np.stack([1j * k2 * psi, -1j * k1 * psi])
    u[0, K, K] = mean_flow[0]
    u[1, K, K] = mean_flow[1]
    return SpectralField(u)


def vorticity_from_velocity(u: SpectralField) -> SpectralField:
    """omega = d u2/dx1 - d u1/dx2 as a scalar spectral field."""
    if not u.is_vector:
        raise ValueError("expected vector velocity field")
    k1, k2, _ = wavenumbers(u.trunc)
    return SpectralField(1j * k1 * u.coeffs[1] - 1j * k2 * u.coeffs[0])


def leray_project(g: SpectralField) -> SpectralField:
    """Orthogonal projection onto divergence-free fields, mode by mode.

    P g = g - k (k . g_k)/|k|^2; the k = 0 mode passes through unchanged
    (the gradient part is undefined there).
    """
    if not g.is_vector:
        raise ValueError("Leray projection acts on vector fields")
    k1, k2, ksq = wavenumbers(g.trunc)
    inv = np.zeros_like(ksq)
    nz = ksq > 0
    inv[nz] = 1.0 / ksq[nz]
    kdotg = k1 * g.coeffs[0] + k2 * g.coeffs[1]
    proj = np.stack(
        [g.coeffs[0] - k1 * kdotg * inv, g.coeffs[1] - k2 * kdotg * inv]
    )
    return SpectralField(proj)


def shift_and_boost(u: SpectralField, a: tuple[float, float], t: float) -> SpectralField:
    """Translation-family member u(x - a t) + a.

    Every coefficient picks up the phase e^{-i k.(a t)} and the constant a
    is added to the k = 0 mode.
    """
    if not u.is_vector:
        raise ValueError("expected vector field")
    K = u.trunc
    k1, k2, _ = wavenumbers(K)
    phase = np.exp(-1j * (k1 * a[0] + k2 * a[1]) * t)
    c = u.coeffs * phase
    c[0, K, K] += a[0]
    c[1, K, K] += a[1]
    return SpectralField(c)


# ---------------------------------------------------------------------------
# grid synthesis / analysis
# ---------------------------------------------------------------------------


def min_grid_size(trunc: int) -> int:
    return 2 * trunc + 2


def _embed_fft_order(coeffs: np.ndarray, size: int) -> np.ndarray:
    K = (coeffs.shape[-1] - 1) // 2
    full = np.zeros(coeffs.shape[:-2] + (size, size), dtype=np.complex128)
    idx = np.arange(-K, K + 1) % size
    full[..., idx[:, None], idx[None, :]] = coeffs
    return full


def _extract_centered(full: np.ndarray, trunc: int) -> np.ndarray:
    size = full.shape[-1]
    idx = np.arange(-trunc, trunc + 1) % size
    return full[..., idx[:, None], idx[None, :]]


def grid_evaluate(field: SpectralField, size: int | None = None) -> np.ndarray:
    """Collocation values on a uniform size x size grid (x1 along axis -2).

    Requires size >= 2K+2 so every stored mode is represented uniquely.
    The field is assumed real-valued; the tiny imaginary residue of the
    synthesis is dropped.
    """
    K = field.trunc
    if size is None:
        size = _fast_grid_size(min_grid_size(K))
    if size < min_grid_size(K):
        raise ValueError(f"grid size {size} too small for truncation {K}")
    full = _embed_fft_order(field.coeffs, size)
    vals = np.fft.ifft2(full) * (size * size)
    return np.ascontiguousarray(vals.real)


def grid_analyze(values: np.ndarray, trunc: int) -> SpectralField:
    """Coefficients of band-limited data sampled on a uniform grid."""
    size = values.shape[-1]
    if values.shape[-2] != size:
        raise ValueError("expected a square grid")
    if size < min_grid_size(trunc):
        raise ValueError(f"grid size {size} too small for truncation {trunc}")
    hat = np.fft.fft2(values) / (size * size)
    return SpectralField(_extract_centered(hat, trunc))


# fast real-valued transforms used by the product kernels ------------------


def _synthesize_real(coeffs: np.ndarray, size: int) -> np.ndarray:
    """Real grid values of a reality-symmetric coefficient array (rfft layout)."""
    K = (coeffs.shape[0] - 1) // 2
    half = np.zeros((size, size // 2 + 1), dtype=np.complex128)
    idx = np.arange(-K, K + 1) % size
    half[idx, : K + 1] = coeffs[:, K:]
    return np.fft.irfft2(half, s=(size, size)) * (size * size)


def _analyze_real(values: np.ndarray, trunc: int) -> np.ndarray:
    """Centered coefficients of real grid data (inverse of _synthesize_real)."""
    size = values.shape[0]
    half = np.fft.rfft2(values) / (size * size)
    n = 2 * trunc + 1
    coeffs = np.empty((n, n), dtype=np.complex128)
    idx = np.arange(-trunc, trunc + 1) % size
    coeffs[:, trunc:] = half[idx][:, : trunc + 1]
    coeffs[:, :trunc] = np.conj(coeffs[::-1, ::-1])[:, :trunc]
    return coeffs


def product_grid_size(trunc: int, dealias: bool = True) -> int:
    """Grid large enough that masked (or padded) products are alias-free."""
    kc = dealias_cutoff(trunc) if dealias else trunc
    return _fast_grid_size(3 * kc + 1)


def nonlinear_term(
    omega: SpectralField, u: SpectralField, dealias: bool = True
) -> SpectralField:
    """Spectral coefficients of the advection u . grad(omega).

    Computed pseudo-spectrally: synthesize u and grad(omega) on a
    collocation grid, multiply pointwise, transform back.  With
    dealias=True both inputs and the output are masked by the 2/3 rule and
    the grid is chosen so the retained modes carry the exact truncated
    convolution; with dealias=False the grid is padded to 3K+1 so the full
    truncated convolution is exact.
    """
    if omega.is_vector or not u.is_vector:
        raise ValueError("expected scalar omega and vector u")
    if omega.trunc != u.trunc:
        raise ValueError("truncation mismatch between omega and u")
    K = omega.trunc
    k1, k2, _ = wavenumbers(K)
    w = omega.coeffs
    u1, u2 = u.coeffs[0], u.coeffs[1]
    if dealias:
        mask = dealias_mask(K)
        w = w * mask
        u1 = u1 * mask
        u2 = u2 * mask
    m = product_grid_size(K, dealias)
    g1 = _synthesize_real(1j * k1 * w, m)
    g2 = _synthesize_real(1j * k2 * w, m)
    u1g = _synthesize_real(u1, m)
    u2g = _synthesize_real(u2, m)
    adv = _analyze_real(u1g * g1 + u2g * g2, K)
    if dealias:
        adv = adv * dealias_mask(K)
    return SpectralField(adv)


# ---------------------------------------------------------------------------
# random band-limited fields (seeded; used by recipes and tests)
# ---------------------------------------------------------------------------


def random_scalar_field(
    trunc: int,
    rng: np.random.Generator,
    kmax: int | None = None,
    profile=None,
) -> SpectralField:
    """Random reality-symmetric scalar field with zero mean.

    Coefficients are complex Gaussian, optionally limited to |k| <= kmax and
    shaped by profile(|k|).
    """
    n = 2 * trunc + 1
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    c = 0.5 * (raw + np.conj(raw[::-1, ::-1]))
    _, _, ksq = wavenumbers(trunc)
    r = np.sqrt(ksq)
    if kmax is not None:
        c = np.where(r <= kmax, c, 0.0)
    if profile is not None:
        c = c * profile(r)
    c[trunc, trunc] = 0.0
    return SpectralField(c)


def random_vector_field(
    trunc: int,
    rng: np.random.Generator,
    kmax: int | None = None,
    profile=None,
    divergence_free: bool = False,
) -> SpectralField:
    """Random reality-symmetric vector field (optionally divergence-free)."""
    if divergence_free:
        return velocity_from_vorticity(
            random_scalar_field(trunc, rng, kmax=kmax, profile=profile)
        )
    parts = [
        random_scalar_field(trunc, rng, kmax=kmax, profile=profile).coeffs
        for _ in range(DIM)
    ]
    return SpectralField(np.stack(parts))
