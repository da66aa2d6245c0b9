"""Linearized vorticity dynamics along a nonlinear base trajectory.

The perturbation obeys

    domega_t - (1/Re) Lap(domega) = -u . grad(domega) - du . grad(omega)

with du the Biot-Savart velocity of domega (zero mean).  The tangent step
is the exact Jacobian-vector product of the discrete nonlinear step: base
and perturbation advance together through the same Runge-Kutta stages, so
the map is exactly linear in the perturbation and finite increments of the
nonlinear solver converge to it with no time-discretization bias.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .solver import SimulationBlowupError, SolverConfig, Stepper, Trajectory, run
from .spectral import (
    SpectralField,
    sobolev_norm,
    velocity_from_vorticity,
    _analyze_real,
    _synthesize_real,
)


class _PairStepper(Stepper):
    """Integrating-factor RK4 on the (base, perturbation) pair."""

    def linear_rhs(self, dw: np.ndarray, grids) -> np.ndarray:
        """-dealias(u.grad dw + du.grad omega) at one base stage."""
        u1g, u2g, g1, g2 = grids
        dwm = dw * self.mask if self.mask is not None else dw
        m = self.grid
        du1g = _synthesize_real(self.bs1 * dwm, m)
        du2g = _synthesize_real(self.bs2 * dwm, m)
        dg1 = _synthesize_real(1j * self.k1 * dwm, m)
        dg2 = _synthesize_real(1j * self.k2 * dwm, m)
        adv = _analyze_real(u1g * dg1 + u2g * dg2 + du1g * g1 + du2g * g2,
                            self.config.trunc)
        if self.mask is not None:
            adv *= self.mask
        adv[self.center] = 0.0
        return -adv

    def rhs_pair(self, w: np.ndarray, dw: np.ndarray):
        wm = w * self.mask if self.mask is not None else w
        m = self.grid
        u1g = _synthesize_real(self.bs1 * wm, m) + self.config.mean_flow[0]
        u2g = _synthesize_real(self.bs2 * wm, m) + self.config.mean_flow[1]
        g1 = _synthesize_real(1j * self.k1 * wm, m)
        g2 = _synthesize_real(1j * self.k2 * wm, m)
        adv = _analyze_real(u1g * g1 + u2g * g2, self.config.trunc)
        if self.mask is not None:
            adv *= self.mask
        adv[self.center] = 0.0
        dadv = self.linear_rhs(dw, (u1g, u2g, g1, g2))
        return -adv, dadv

    def step_pair(self, w: np.ndarray, dw: np.ndarray):
        h = self.config.dt
        E, E2 = self.half_factor, self.full_factor
        f1, df1 = self.rhs_pair(w, dw)
        f2, df2 = self.rhs_pair(E * (w + 0.5 * h * f1), E * (dw + 0.5 * h * df1))
        f3, df3 = self.rhs_pair(E * w + 0.5 * h * f2, E * dw + 0.5 * h * df2)
        f4, df4 = self.rhs_pair(E2 * w + h * E * f3, E2 * dw + h * E * df3)
        w_new = E2 * w + (h / 6.0) * (E2 * f1 + 2.0 * E * (f2 + f3) + f4)
        dw_new = E2 * dw + (h / 6.0) * (E2 * df1 + 2.0 * E * (df2 + df3) + df4)
        return w_new, dw_new


def tangent_step(
    omega: SpectralField, domega: SpectralField, config: SolverConfig
) -> tuple[SpectralField, SpectralField]:
    """One paired step; returns (omega_next, domega_next)."""
    if omega.trunc != config.trunc or domega.trunc != config.trunc:
        raise ValueError("truncation mismatch")
    stepper = _PairStepper(config)
    w, dw = stepper.step_pair(omega.coeffs, domega.coeffs)
    stepper.check_finite(w, config.dt)
    return SpectralField(w), SpectralField(dw)


@dataclass
class GrowthRecord:
    """Amplification factors Lambda_n(t) = ||du(t)||_n / ||du(0)||_n."""

    times: np.ndarray
    lambdas: dict[int, np.ndarray]
    reynolds: float
    base_label: str = ""

    @property
    def norm_indices(self) -> list[int]:
        return sorted(self.lambdas)


def _as_steps(sample_times, dt: float, n_steps: int) -> list[int]:
    out = []
    for ts in sample_times:
        s = int(round(ts / dt))
        if s < 0 or s > n_steps:
            raise ValueError(f"sample time {ts} outside the base trajectory")
        out.append(s)
    return sorted(set(out))


def amplification_curve(
    base: Trajectory,
    domega0: SpectralField,
    norm_indices,
    sample_times,
) -> GrowthRecord:
    """Evolve a perturbation along the base run and record Lambda_n(t).

    Norms are taken on the perturbation velocity (Biot-Savart of domega).
    The base is re-integrated from its initial state, which reproduces the
    stored trajectory exactly (the solver is deterministic).  Sample times
    must lie within the stored trajectory.
    """
    if domega0.trunc != base.config.trunc:
        raise ValueError("perturbation truncation mismatch")
    covered = replace(base.config, t_end=base.steps[-1] * base.config.dt)
    record, _ = growth_experiment(
        covered, base.states[0], domega0, norm_indices, sample_times
    )
    record.base_label = base.label
    return record


def growth_experiment(
    config: SolverConfig,
    omega0: SpectralField,
    domega0: SpectralField,
    norm_indices,
    sample_times,
    base_norm_index: int | None = None,
) -> tuple[GrowthRecord, float]:
    """One paired integration: amplification record plus max base velocity norm.

    Like amplification_curve but without a pre-existing trajectory; the
    returned float is max over sample times of ||u_base||_{base_norm_index}
    (nan when base_norm_index is None), which feeds the growth envelope.
    """
    if domega0.max_abs() == 0.0:
        raise ValueError("zero initial perturbation has no amplification factor")
    norm_indices = list(norm_indices)
    n_steps = int(round(config.t_end / config.dt))
    targets = _as_steps(sample_times, config.dt, n_steps)
    du0 = velocity_from_vorticity(domega0)
    norm0 = {n: sobolev_norm(du0, n) for n in norm_indices}
    for n, v in norm0.items():
        if v == 0.0:
            raise ValueError(f"initial perturbation has zero H^{n} velocity norm")
    stepper = _PairStepper(config)
    w, dw = omega0.coeffs, domega0.coeffs
    times, lam = [], {n: [] for n in norm_indices}
    base_max = float("nan") if base_norm_index is None else 0.0

    def record(step_idx: int):
        nonlocal base_max
        du = velocity_from_vorticity(SpectralField(dw))
        times.append(step_idx * config.dt)
        for n in norm_indices:
            lam[n].append(sobolev_norm(du, n) / norm0[n])
        if base_norm_index is not None:
            u = velocity_from_vorticity(SpectralField(w), config.mean_flow)
            base_max = max(base_max, sobolev_norm(u, base_norm_index))

    pos = 0
    if targets and targets[0] == 0:
        record(0)
        targets = targets[1:]
    for target in targets:
        while pos < target:
            w, dw = stepper.step_pair(w, dw)
            pos += 1
            stepper.check_finite(w, pos * config.dt)
        record(pos)
    rec = GrowthRecord(
        times=np.asarray(times),
        lambdas={n: np.asarray(v) for n, v in lam.items()},
        reynolds=config.reynolds,
    )
    return rec, base_max


def evolve_pair(
    config: SolverConfig, omega0: SpectralField, domega0: SpectralField, t: float
) -> tuple[SpectralField, SpectralField]:
    """Integrate base and tangent from t=0 to t; returns final (omega, domega)."""
    n_steps = int(round(t / config.dt))
    if abs(n_steps * config.dt - t) > 1e-9 * max(1.0, t):
        raise ValueError("t must be an integer number of steps")
    stepper = _PairStepper(config)
    w, dw = omega0.coeffs, domega0.coeffs
    for i in range(n_steps):
        w, dw = stepper.step_pair(w, dw)
        stepper.check_finite(w, (i + 1) * config.dt)
    return SpectralField(w), SpectralField(dw)


@dataclass(frozen=True)
class RemainderRow:
    eps: float
    remainder_norm: float
    ratio_eps: float
    ratio_eps_sq: float
    failed: bool = False


@dataclass
class RemainderTable:
    norm_index: int
    probe_time: float
    rows: list[RemainderRow] = field(default_factory=list)


def remainder_experiment(
    config: SolverConfig,
    omega0: SpectralField,
    direction: SpectralField,
    epsilons,
    t: float,
    norm_index: int,
) -> RemainderTable:
    """Finite-increment vs tangent comparison probing differentiability.

    For each eps the nonlinear solver is run from omega0 + eps*direction;
    the velocity increment delta_u(t) is compared with eps*du(t) from the
    tangent run, and ||delta_u - eps du||_n is reported with its ratios to
    eps and eps^2.  A blowup of an individual nonlinear run marks that row
    failed and the experiment continues.
    """
    eps_list = sorted((float(e) for e in epsilons), reverse=True)
    if any(e <= 0 for e in eps_list):
        raise ValueError("epsilons must be positive")
    n_steps = int(round(t / config.dt))
    run_cfg = SolverConfig(
        trunc=config.trunc,
        reynolds=config.reynolds,
        dt=config.dt,
        t_end=n_steps * config.dt,
        dealias=config.dealias,
        checkpoint_interval=max(n_steps, 1),
        mean_flow=config.mean_flow,
    )

    base_end, dw_end = evolve_pair(run_cfg, omega0, direction, run_cfg.t_end)
    u_base = velocity_from_vorticity(base_end, config.mean_flow)
    du_unit = velocity_from_vorticity(dw_end)

    table = RemainderTable(norm_index=norm_index, probe_time=run_cfg.t_end)
    for eps in eps_list:
        try:
            traj = run(run_cfg, omega0 + eps * direction)
        except SimulationBlowupError:
            table.rows.append(RemainderRow(eps, float("nan"), float("nan"),
                                           float("nan"), failed=True))
            continue
        u_pert = velocity_from_vorticity(traj.states[-1], config.mean_flow)
        delta_u = u_pert - u_base
        rem = sobolev_norm(delta_u - eps * du_unit, norm_index)
        table.rows.append(RemainderRow(eps, rem, rem / eps, rem / eps**2))
    return table
