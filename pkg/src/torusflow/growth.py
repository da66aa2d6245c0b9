"""Growth-law fits, amplification envelopes, and Reynolds-number sweeps.

All fits are unweighted least squares in the log domain.  The square-root
exponential model ln(Lambda) = ln(A) + rate*sqrt(t) drops t = 0 samples by
default (the optional anchor instead pins the intercept at ln(A) = 0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .solver import SimulationBlowupError
from .spectral import SpectralField, sobolev_norm, velocity_from_vorticity
from .tangent import GrowthRecord, evolve_pair


@dataclass(frozen=True)
class FitResult:
    model: str  # "sqrt_exp" | "exp" | "power"
    params: dict[str, float]
    residual: float  # sum of squared residuals in the log domain
    n_samples: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": self.model,
                "params": self.params,
                "residual": self.residual,
                "n_samples": self.n_samples,
            },
            sort_keys=True,
        )


def _validate_samples(times, values, positive_t=False):
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be matching 1-D arrays")
    if t.size < 3:
        raise ValueError("need at least 3 samples")
    if np.any(y <= 0):
        raise ValueError("values must be positive (fits act on logarithms)")
    if positive_t:
        if np.any(t < 0):
            raise ValueError("times must be >= 0")
    return t, y


def _line_fit(x, y):
    """Least squares y ~ a + b x; returns (a, b, rss)."""
    if float(np.ptp(x)) == 0.0:
        raise ValueError("degenerate design: all abscissae equal")
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.dot(resid, resid))


def fit_sqrt_exponential(times, values, anchor_origin: bool = False) -> FitResult:
    """Fit Lambda = A e^{rate sqrt(t)} by least squares on ln(Lambda) vs sqrt(t).

    t = 0 samples are excluded unless anchor_origin is set, in which case
    the intercept is pinned at 0 (ln Lambda(0) = 0) and all samples enter.
    """
    t, y = _validate_samples(times, values, positive_t=True)
    ln_y = np.log(y)
    s = np.sqrt(t)
    if anchor_origin:
        denom = float(np.dot(s, s))
        if denom == 0.0:
            raise ValueError("degenerate design: all times zero")
        rate = float(np.dot(s, ln_y)) / denom
        resid = ln_y - rate * s
        return FitResult(
            "sqrt_exp",
            {"amplitude": 1.0, "rate": rate},
            float(np.dot(resid, resid)),
            int(t.size),
        )
    keep = t > 0
    if np.count_nonzero(keep) < 2:
        raise ValueError("need at least 2 samples with t > 0")
    a, b, rss = _line_fit(s[keep], ln_y[keep])
    return FitResult(
        "sqrt_exp", {"amplitude": math.exp(a), "rate": b}, rss, int(np.count_nonzero(keep))
    )


def fit_exponential(times, values) -> FitResult:
    """Fit Lambda = A e^{rate t} by least squares on ln(Lambda) vs t."""
    t, y = _validate_samples(times, values, positive_t=True)
    a, b, rss = _line_fit(t, np.log(y))
    return FitResult("exp", {"amplitude": math.exp(a), "rate": b}, rss, int(t.size))


def fit_power_law(x, y) -> FitResult:
    """Fit y = C x^p by least squares on ln(y) vs ln(x)."""
    xv, yv = _validate_samples(x, y)
    if np.any(xv <= 0):
        raise ValueError("abscissae must be positive for a power-law fit")
    a, b, rss = _line_fit(np.log(xv), np.log(yv))
    return FitResult("power", {"prefactor": math.exp(a), "exponent": b}, rss, int(xv.size))


@dataclass(frozen=True)
class ModelComparison:
    results: tuple[FitResult, ...]

    @property
    def ranking(self) -> list[str]:
        return [r.model for r in sorted(self.results, key=lambda r: (r.residual, r.model))]

    @property
    def best(self) -> FitResult:
        return min(self.results, key=lambda r: (r.residual, r.model))


def compare_models(times, values) -> ModelComparison:
    """Rank the sqrt-exponential against the plain exponential model.

    Both fits use the same samples (t = 0 excluded) so the log-domain
    residuals are comparable.
    """
    t, y = _validate_samples(times, values, positive_t=True)
    keep = t > 0
    if np.count_nonzero(keep) < 3:
        raise ValueError("need at least 3 samples with t > 0")
    t, y = t[keep], y[keep]
    return ModelComparison((fit_sqrt_exponential(t, y), fit_exponential(t, y)))


# ---------------------------------------------------------------------------
# amplification envelope max Lambda <= e^{rate sqrt(Re) sqrt(t) + rate1 t}
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnvelopeParams:
    """Envelope constants derived from a domain constant c and the base flow.

    sqrt_rate multiplies sqrt(Re t) and linear_rate multiplies t:
    sqrt_rate = 8 c / sqrt(2e) * max_base_norm,
    linear_rate = sqrt(2e)/2 * sqrt_rate.
    """

    c: float
    max_base_norm: float
    reynolds: float

    @property
    def sqrt_rate(self) -> float:
        return 8.0 * self.c / math.sqrt(2.0 * math.e) * self.max_base_norm

    @property
    def linear_rate(self) -> float:
        return math.sqrt(2.0 * math.e) / 2.0 * self.sqrt_rate


def envelope_margins(record: GrowthRecord, env: EnvelopeParams, norm_index: int) -> np.ndarray:
    """margin(t) = sqrt_rate sqrt(Re t) + linear_rate t - ln Lambda(t), per sample.

    All margins nonnegative means the envelope holds for this c.
    """
    lam = record.lambdas[norm_index]
    t = record.times
    return env.sqrt_rate * np.sqrt(env.reynolds * t) + env.linear_rate * t - np.log(lam)


def calibrate_envelope_constant(
    record: GrowthRecord,
    max_base_norm: float,
    norm_index: int,
    tol: float = 1e-9,
) -> float:
    """Smallest c for which every margin is >= 0, located by bisection."""
    t = record.times
    lam = record.lambdas[norm_index]
    active = t > 0
    if not np.any(active):
        raise ValueError("record has no samples with t > 0")

    def min_margin(c: float) -> float:
        env = EnvelopeParams(c=c, max_base_norm=max_base_norm, reynolds=record.reynolds)
        m = (env.sqrt_rate * np.sqrt(record.reynolds * t[active])
             + env.linear_rate * t[active])
        return float(np.min(m - np.log(lam[active])))

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if min_margin(hi) >= 0.0:
            break
        hi *= 2.0
    else:
        raise RuntimeError("envelope constant bracket did not close")
    if min_margin(lo) >= 0.0:
        return lo
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if min_margin(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# Reynolds sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    reynolds: float
    amplification: float
    failed: bool = False
    note: str = ""


@dataclass
class SweepResult:
    t_probe: float
    norm_index: int
    rows: list[SweepRow] = field(default_factory=list)
    fit: FitResult | None = None

    def survivors(self) -> list[SweepRow]:
        return [r for r in self.rows if not r.failed]


def turnover_time(omega0: SpectralField, mean_flow=(0.0, 0.0)) -> float:
    """Large-eddy turnover estimate: box size over rms velocity."""
    u = velocity_from_vorticity(omega0, mean_flow)
    u_rms = sobolev_norm(u, 0) / (2.0 * math.pi)
    if u_rms == 0.0:
        raise ValueError("zero velocity field has no turnover time")
    return 2.0 * math.pi / u_rms


def reynolds_sweep(recipe, re_values, t_probe: float, norm_index: int = 0) -> SweepResult:
    """Amplification at t_probe across Reynolds numbers, plus a power-law fit.

    recipe(re) must return (SolverConfig, omega0, domega0) built from the
    same seed for every re, so runs differ only through the Reynolds
    number.  Runs that blow up are excluded with a note; the fit needs at
    least 3 survivors.
    """
    result = SweepResult(t_probe=t_probe, norm_index=norm_index)
    for re in re_values:
        config, omega0, domega0 = recipe(re)
        norm0 = sobolev_norm(velocity_from_vorticity(domega0), norm_index)
        if norm0 == 0.0:
            raise ValueError("perturbation has zero norm in the requested grading")
        try:
            _, dw = evolve_pair(config, omega0, domega0, t_probe)
        except SimulationBlowupError as err:
            result.rows.append(SweepRow(re, float("nan"), failed=True, note=str(err)))
            continue
        amp = sobolev_norm(velocity_from_vorticity(dw), norm_index) / norm0
        result.rows.append(SweepRow(re, amp))
    ok = result.survivors()
    if len(ok) < 3:
        raise ValueError(f"only {len(ok)} successful runs; need >= 3 for the fit")
    result.fit = fit_power_law([r.reynolds for r in ok], [r.amplification for r in ok])
    return result
