"""Nonlinear 2D Navier-Stokes / Euler solver in vorticity form.

Advances  omega_t - (1/Re) Lap(omega) = -u . grad(omega)  pseudo-spectrally
on the periodic box, with u recovered from omega plus an optional constant
mean flow.  Time stepping is classical four-stage Runge-Kutta on the
advection term with the viscous factor e^{-|k|^2 dt/Re} applied exactly as
an integrating factor; Re = INFINITE (math.inf) gives the Euler equations
with factor 1.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    BOX_MEASURE,
    SpectralField,
    dealias_mask,
    grid_evaluate,
    product_grid_size,
    sobolev_norm,
    velocity_from_vorticity,
    wavenumbers,
    _analyze_real,
    _synthesize_real,
)

INFINITE = math.inf

# RK4 stability reach on the imaginary axis, used for the CFL advisory
CFL_SAFETY = 2.8

_BLOWUP_LIMIT = 1e12


class SimulationBlowupError(RuntimeError):
    """Raised when coefficients go non-finite or explode mid-run."""

    def __init__(self, t: float, detail: str = ""):
        self.t = t
        super().__init__(f"simulation aborted at t={t:.6g}: {detail or 'blowup'}")


@dataclass(frozen=True)
class SolverConfig:
    trunc: int
    reynolds: float
    dt: float
    t_end: float = 0.0
    dealias: bool = True
    checkpoint_interval: int = 100
    mean_flow: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.trunc < 1:
            raise ValueError("truncation must be >= 1")
        if not (self.reynolds > 0):
            raise ValueError("Reynolds number must be positive (math.inf for Euler)")
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.checkpoint_interval < 1:
            raise ValueError("checkpoint_interval must be >= 1")

    @property
    def inviscid(self) -> bool:
        return math.isinf(self.reynolds)


@dataclass(frozen=True)
class SimulationState:
    t: float
    omega: SpectralField
    step_count: int = 0


@dataclass
class Trajectory:
    """Checkpointed vorticity history of one run."""

    config: SolverConfig
    times: list[float] = field(default_factory=list)
    steps: list[int] = field(default_factory=list)
    states: list[SpectralField] = field(default_factory=list)
    label: str = ""

    def append(self, state: SimulationState):
        self.times.append(state.t)
        self.steps.append(state.step_count)
        self.states.append(state.omega)

    @property
    def t_end(self) -> float:
        return self.times[-1] if self.times else 0.0

    def initial_state(self) -> SimulationState:
        return SimulationState(t=self.times[0], omega=self.states[0], step_count=self.steps[0])


class Stepper:
    """Precomputed kernels for one (trunc, Re, dt) combination.

    Used directly by the tangent integrator, which needs the base-flow
    collocation grids of every Runge-Kutta stage.
    """

    def __init__(self, config: SolverConfig):
        self.config = config
        K = config.trunc
        self.k1, self.k2, ksq = wavenumbers(K)
        if config.inviscid:
            self.half_factor = np.ones_like(ksq)
        else:
            self.half_factor = np.exp(-ksq * config.dt / (2.0 * config.reynolds))
        self.full_factor = self.half_factor * self.half_factor
        self.mask = dealias_mask(K) if config.dealias else None
        self.grid = product_grid_size(K, config.dealias)
        inv = np.zeros_like(ksq)
        nz = ksq > 0
        inv[nz] = 1.0 / ksq[nz]
        # Biot-Savart multipliers: u = (ik2/|k|^2, -ik1/|k|^2) omega
        self.bs1 = 1j * self.k2 * inv
        self.bs2 = -1j * self.k1 * inv
        self.center = (K, K)

    def rhs_with_grids(self, w: np.ndarray):
        """Advection right-hand side -dealias(u.grad w) and its stage grids.

        Returns (rhs, (u1g, u2g)) where the velocity grids include the mean
        flow and are reused by the linearized dynamics.
        """
        wm = w * self.mask if self.mask is not None else w
        m = self.grid
        u1g = _synthesize_real(self.bs1 * wm, m) + self.config.mean_flow[0]
        u2g = _synthesize_real(self.bs2 * wm, m) + self.config.mean_flow[1]
        g1 = _synthesize_real(1j * self.k1 * wm, m)
        g2 = _synthesize_real(1j * self.k2 * wm, m)
        adv = _analyze_real(u1g * g1 + u2g * g2, self.config.trunc)
        if self.mask is not None:
            adv *= self.mask
        adv[self.center] = 0.0  # exact: the box mean of div(u omega) vanishes
        return -adv, (u1g, u2g)

    def rhs(self, w: np.ndarray) -> np.ndarray:
        return self.rhs_with_grids(w)[0]

    def step_array(self, w: np.ndarray) -> np.ndarray:
        """One integrating-factor RK4 step on a raw coefficient array."""
        h = self.config.dt
        E, E2 = self.half_factor, self.full_factor
        f1 = self.rhs(w)
        f2 = self.rhs(E * (w + 0.5 * h * f1))
        f3 = self.rhs(E * w + 0.5 * h * f2)
        f4 = self.rhs(E2 * w + h * E * f3)
        return E2 * w + (h / 6.0) * (E2 * f1 + 2.0 * E * (f2 + f3) + f4)

    def check_finite(self, w: np.ndarray, t: float):
        if not np.all(np.isfinite(w)):
            raise SimulationBlowupError(t, "non-finite coefficients")
        peak = float(np.max(np.abs(w)))
        if peak > _BLOWUP_LIMIT:
            raise SimulationBlowupError(t, f"coefficient magnitude {peak:.3e}")


def step(state: SimulationState, config: SolverConfig) -> SimulationState:
    """Advance one time step; raises SimulationBlowupError on failure."""
    if state.omega.trunc != config.trunc:
        raise ValueError("state truncation does not match config")
    stepper = Stepper(config)
    w = stepper.step_array(state.omega.coeffs)
    t = state.t + config.dt
    stepper.check_finite(w, t)
    return SimulationState(t=t, omega=SpectralField(w), step_count=state.step_count + 1)


def cfl_number(config: SolverConfig, omega0: SpectralField) -> float:
    """dt * max|u| * K, the advisory stability estimate for the initial data."""
    u = velocity_from_vorticity(omega0, config.mean_flow)
    vals = grid_evaluate(u)
    umax = float(np.max(np.sqrt(vals[0] ** 2 + vals[1] ** 2)))
    return config.dt * umax * config.trunc


def run(config: SolverConfig, omega0: SpectralField, label: str = "") -> Trajectory:
    """Integrate to t_end, storing a checkpoint every checkpoint_interval steps.

    The first and last states are always stored.  Deterministic for fixed
    config and initial data.
    """
    if omega0.trunc != config.trunc:
        raise ValueError("initial data truncation does not match config")
    cfl = cfl_number(config, omega0)
    if cfl > CFL_SAFETY:
        warnings.warn(
            f"CFL estimate dt*max|u|*K = {cfl:.3g} exceeds {CFL_SAFETY}; "
            "the run may be unstable",
            stacklevel=2,
        )
    traj = Trajectory(config=config, label=label)
    state = SimulationState(t=0.0, omega=omega0, step_count=0)
    traj.append(state)
    n_steps = int(round(config.t_end / config.dt))
    if abs(n_steps * config.dt - config.t_end) > 1e-9 * max(1.0, config.t_end):
        raise ValueError("t_end must be an integer number of steps")
    stepper = Stepper(config)
    w = omega0.coeffs
    for i in range(1, n_steps + 1):
        w = stepper.step_array(w)
        t = i * config.dt
        stepper.check_finite(w, t)
        if i % config.checkpoint_interval == 0 or i == n_steps:
            traj.append(SimulationState(t=t, omega=SpectralField(w), step_count=i))
    return traj


@dataclass(frozen=True)
class Diagnostics:
    t: float
    energy: float
    enstrophy: float
    palinstrophy: float
    velocity_norms: tuple[float, ...]  # H^0 .. H^4 of the velocity


def diagnostics(
    state: SimulationState, mean_flow: tuple[float, float] = (0.0, 0.0)
) -> Diagnostics:
    """Quadratic invariants and graded velocity norms of the current state."""
    omega = state.omega
    u = velocity_from_vorticity(omega, mean_flow)
    _, _, ksq = wavenumbers(omega.trunc)
    enstrophy = 0.5 * sobolev_norm(omega, 0) ** 2
    palinstrophy = 0.5 * BOX_MEASURE * float(np.sum(ksq * np.abs(omega.coeffs) ** 2))
    energy = 0.5 * sobolev_norm(u, 0) ** 2
    norms = tuple(sobolev_norm(u, n) for n in range(5))
    return Diagnostics(
        t=state.t,
        energy=energy,
        enstrophy=enstrophy,
        palinstrophy=palinstrophy,
        velocity_norms=norms,
    )


# ---------------------------------------------------------------------------
# checkpoint files: magic "RDF1", u32 version, u32 K, f64 Re, f64 t,
# then (2K+1)^2 complex128 vorticity coefficients, row-major k1-then-k2,
# everything little-endian.  Re <= 0 encodes the Euler case.
# ---------------------------------------------------------------------------

CHECKPOINT_MAGIC = b"RDF1"
CHECKPOINT_VERSION = 1


def write_checkpoint(path, state: SimulationState, reynolds: float):
    K = state.omega.trunc
    re_enc = -1.0 if math.isinf(reynolds) else float(reynolds)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, K))
        fh.write(struct.pack("<dd", re_enc, state.t))
        fh.write(np.ascontiguousarray(state.omega.coeffs, dtype="<c16").tobytes())


def read_checkpoint(path) -> tuple[SimulationState, float]:
    """Returns (state, reynolds); reynolds is math.inf for the Euler case."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"not a checkpoint file (magic {magic!r})")
        version, K = struct.unpack("<II", fh.read(8))
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        re_enc, t = struct.unpack("<dd", fh.read(16))
        n = 2 * K + 1
        raw = fh.read(n * n * 16)
        if len(raw) != n * n * 16:
            raise ValueError("truncated checkpoint file")
    coeffs = np.frombuffer(raw, dtype="<c16").reshape(n, n).astype(np.complex128)
    reynolds = INFINITE if re_enc <= 0 else re_enc
    # step count is not stored; reconstructing it is the caller's concern
    return SimulationState(t=t, omega=SpectralField(coeffs)), reynolds
