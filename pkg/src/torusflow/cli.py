"""Command-line front end: canned experiments, CSV tables, checkpoints.

Subcommands: simulate, tangent, theorem-scan, oracle, sweep-re, fit.
Runs are configured by `key = value` files (a TOML-compatible subset:
comments with #, quoted or bare strings, booleans true/false, numbers,
comma-separated lists) plus repeatable --override key=value flags.  Every
run writes a manifest echoing the fully resolved configuration; rerunning
from the manifest reproduces the outputs bit for bit.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .growth import (
    fit_exponential,
    fit_power_law,
    fit_sqrt_exponential,
    reynolds_sweep,
    turnover_time,
)
from .oracles import (
    heat_semigroup,
    is_divergent,
    shear_family_lower_bound,
    ShearFamilyParams,
    shear_family_dsigma_h3_norm,
    shear_family_vorticity,
    couette_inviscid_evolve,
    strip_hk_norm,
)
from .solver import (
    SimulationBlowupError,
    SimulationState,
    SolverConfig,
    diagnostics,
    read_checkpoint,
    run,
    write_checkpoint,
)
from .spectral import (
    SpectralField,
    dealias_cutoff,
    random_scalar_field,
    sobolev_norm,
    velocity_from_vorticity,
)
from .tangent import amplification_curve, remainder_experiment
from .translation import TailSpectrumSpec, divergence_scan


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config parsing / manifest
# ---------------------------------------------------------------------------


def parse_scalar(text: str):
    s = text.strip()
    if len(s) >= 2 and s[0] == '"' and s[-1] == '"':
        return s[1:-1]
    low = s.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    return s


def parse_value(text: str):
    s = text.strip()
    if "," in s and not (s.startswith('"') and s.endswith('"')):
        return [parse_scalar(p) for p in s.split(",") if p.strip() != ""]
    return parse_scalar(s)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    s = str(value)
    return f'"{s}"' if (" " in s or s == "" or "," in s) else s


def parse_config_file(path) -> dict:
    values: dict = {}
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if '"' not in line and "#" in line:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        values[key.strip()] = parse_value(val)
    return values


class Settings:
    """Resolved configuration with tracked key usage."""

    def __init__(self, command: str, values: dict, seed: int, out_dir: Path):
        self.command = command
        self.values = dict(values)
        self.seed = seed
        self.out_dir = out_dir
        self._used: set[str] = set()

    _REQUIRED = object()

    def _fetch(self, key, default):
        self._used.add(key)
        if key in self.values:
            return self.values[key]
        if default is Settings._REQUIRED:
            raise ConfigError(f"missing required config key '{key}'")
        return default

    def get_float(self, key, default=_REQUIRED) -> float:
        v = self._fetch(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"config key '{key}' must be a number, got {v!r}")
        return float(v)

    def get_int(self, key, default=_REQUIRED) -> int:
        v = self._fetch(key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"config key '{key}' must be an integer, got {v!r}")
        return v

    def get_bool(self, key, default=_REQUIRED) -> bool:
        v = self._fetch(key, default)
        if not isinstance(v, bool):
            raise ConfigError(f"config key '{key}' must be true/false, got {v!r}")
        return v

    def get_str(self, key, default=_REQUIRED) -> str:
        v = self._fetch(key, default)
        if not isinstance(v, str):
            raise ConfigError(f"config key '{key}' must be a string, got {v!r}")
        return v

    def get_float_list(self, key, default=_REQUIRED) -> list[float]:
        v = self._fetch(key, default)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return [float(v)]
        if isinstance(v, list) and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
        ):
            return [float(x) for x in v]
        raise ConfigError(f"config key '{key}' must be a list of numbers, got {v!r}")

    def get_int_list(self, key, default=_REQUIRED) -> list[int]:
        v = self._fetch(key, default)
        if isinstance(v, int) and not isinstance(v, bool):
            return [v]
        if isinstance(v, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in v):
            return list(v)
        raise ConfigError(f"config key '{key}' must be a list of integers, got {v!r}")

    def reject_unknown_keys(self):
        unknown = sorted(set(self.values) - self._used)
        if unknown:
            raise ConfigError(
                "unknown config key(s) for command "
                f"'{self.command}': {', '.join(unknown)}"
            )

    def manifest_values(self) -> dict:
        out = dict(self.values)
        out["seed"] = self.seed
        return out


def write_manifest(settings: Settings):
    lines = [f"command = {settings.command}"]
    for key in sorted(settings.manifest_values()):
        lines.append(f"{key} = {format_value(settings.manifest_values()[key])}")
    (settings.out_dir / "manifest.txt").write_text("\n".join(lines) + "\n")


def fmt(x) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header: list[str], rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], list[list[float]]]:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read CSV {path}: {err}") from err
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ConfigError(f"CSV {path} has no data rows")
    header = [h.strip() for h in lines[0].split(",")]
    rows = []
    for ln in lines[1:]:
        try:
            rows.append([float(v) for v in ln.split(",")])
        except ValueError as err:
            raise ConfigError(f"CSV {path}: non-numeric row {ln!r}") from err
    return header, rows


# ---------------------------------------------------------------------------
# shared recipes
# ---------------------------------------------------------------------------


def _gaussian_profile(peak: float):
    return lambda r: np.exp(-0.5 * (r / peak) ** 2)


def _vorticity_profile(peak: float):
    return lambda r: r**2 * np.exp(-0.5 * (r / peak) ** 2)


def build_base(settings: Settings):
    """Initial vorticity plus solver config from the shared recipe keys."""
    trunc = settings.get_int("trunc", 64)
    reynolds = settings.get_float("reynolds", 1000.0)
    dt = settings.get_float("dt", 1e-3)
    t_end = settings.get_float("t_end", 1.0)
    dealias = settings.get_bool("dealias", True)
    interval = settings.get_int("checkpoint_interval", 100)
    mean1 = settings.get_float("mean_flow_1", 0.0)
    mean2 = settings.get_float("mean_flow_2", 0.0)
    kind = settings.get_str("initial", "random-smooth")

    if kind == "zero":
        omega0 = SpectralField.zeros(trunc)
    elif kind == "sine":
        amp = settings.get_float("amplitude", 1.0)
        omega0 = SpectralField.from_modes(trunc, {(0, 1): amp / 2j})
    elif kind == "random-smooth":
        peak = settings.get_float("peak_k", 4.0)
        target = settings.get_float("target_urms", 1.0)
        rng = np.random.default_rng(settings.seed)
        omega0 = random_scalar_field(trunc, rng, profile=_vorticity_profile(peak))
        urms = sobolev_norm(velocity_from_vorticity(omega0), 0) / (2.0 * math.pi)
        omega0 = omega0 * (target / urms)
    elif kind == "shear-family":
        gamma = settings.get_float("gamma", 1.0)
        sigma = settings.get_float("sigma", 0.0)
        # default the series to the resolved band: the truncated family is
        # itself an exact solution, so the run can be checked against it
        default_modes = dealias_cutoff(trunc) if dealias else trunc
        n_modes = settings.get_int("n_modes", default_modes)
        if n_modes > trunc:
            raise ConfigError(f"n_modes {n_modes} exceeds truncation {trunc}")
        params = ShearFamilyParams(
            gamma=gamma, sigma=sigma, reynolds=reynolds, n_modes=n_modes
        )
        omega0 = SpectralField(
            np.pad(shear_family_vorticity(params, 0.0).coeffs, trunc - n_modes)
        )
        mean1, mean2 = 0.0, sigma
    elif kind == "checkpoint":
        path = settings.get_str("base_checkpoint")
        try:
            state, ck_re = read_checkpoint(path)
        except OSError as err:
            raise ConfigError(f"cannot read base checkpoint {path}: {err}") from err
        omega0 = state.omega
        if "reynolds" not in settings.values:
            reynolds = ck_re
        if omega0.trunc != trunc and "trunc" in settings.values:
            raise ConfigError(
                f"checkpoint truncation {omega0.trunc} != configured {trunc}"
            )
        trunc = omega0.trunc
    else:
        raise ConfigError(
            f"unknown initial condition '{kind}' "
            "(choose zero, sine, random-smooth, shear-family, checkpoint)"
        )

    config = SolverConfig(
        trunc=trunc,
        reynolds=reynolds,
        dt=dt,
        t_end=t_end,
        dealias=dealias,
        checkpoint_interval=interval,
        mean_flow=(mean1, mean2),
    )
    return config, omega0


def build_perturbation(settings: Settings, trunc: int) -> SpectralField:
    peak = settings.get_float("pert_peak_k", 8.0)
    seed = settings.get_int("pert_seed", settings.seed + 1)
    kmax = settings.get_int("pert_kmax", 0)
    rng = np.random.default_rng(seed)
    field = random_scalar_field(
        trunc, rng, kmax=kmax if kmax > 0 else None, profile=_gaussian_profile(peak)
    )
    norm_index = settings.get_int("pert_normalize_norm", -1)
    if norm_index >= 0:
        amp = settings.get_float("pert_amplitude", 1.0)
        cur = sobolev_norm(velocity_from_vorticity(field), norm_index)
        field = field * (amp / cur)
    return field


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(settings: Settings) -> int:
    config, omega0 = build_base(settings)
    settings.reject_unknown_keys()
    write_manifest(settings)
    traj = run(config, omega0)
    rows = []
    for t, step_idx, state in zip(traj.times, traj.steps, traj.states):
        d = diagnostics(SimulationState(t=t, omega=state), config.mean_flow)
        rows.append(
            (t, d.energy, d.enstrophy, d.palinstrophy, *d.velocity_norms)
        )
        write_checkpoint(
            settings.out_dir / f"ckpt_{step_idx:08d}.rdf",
            SimulationState(t=t, omega=state, step_count=step_idx),
            config.reynolds,
        )
    write_csv(
        settings.out_dir / "diagnostics.csv",
        ["t", "energy", "enstrophy", "palinstrophy",
         "u_h0", "u_h1", "u_h2", "u_h3", "u_h4"],
        rows,
    )
    return 0


def cmd_tangent(settings: Settings) -> int:
    mode = settings.get_str("mode", "growth")
    config, omega0 = build_base(settings)
    direction = build_perturbation(settings, config.trunc)
    if mode == "growth":
        norms = settings.get_int_list("norms", [0, 3])
        samples = settings.get_int("samples", 20)
        settings.reject_unknown_keys()
        write_manifest(settings)
        traj = run(config, omega0)
        times = np.linspace(0.0, config.t_end, samples + 1)
        record = amplification_curve(traj, direction, norms, times)
        header = ["t"] + [f"lambda_{n}" for n in record.norm_indices]
        rows = [
            (t, *(record.lambdas[n][i] for n in record.norm_indices))
            for i, t in enumerate(record.times)
        ]
        write_csv(settings.out_dir / "growth.csv", header, rows)
        return 0
    if mode == "remainder":
        eps_list = settings.get_float_list("eps_list", [1e-2, 1e-3, 1e-4])
        norm_index = settings.get_int("norm", 3)
        settings.reject_unknown_keys()
        write_manifest(settings)
        table = remainder_experiment(
            config, omega0, direction, eps_list, config.t_end, norm_index
        )
        rows = [
            (r.eps, r.remainder_norm, r.ratio_eps, r.ratio_eps_sq)
            for r in table.rows
        ]
        write_csv(
            settings.out_dir / "remainder.csv",
            ["eps", "remainder_norm", "remainder_over_eps", "remainder_over_eps2"],
            rows,
        )
        return 0
    raise ConfigError(f"unknown tangent mode '{mode}' (choose growth, remainder)")


def cmd_theorem_scan(settings: Settings) -> int:
    n = settings.get_int("n", 3)
    t = settings.get_float("t", 1.0)
    decay = settings.get_float("decay", float(n + 2))  # borderline n+1+d/2 for d=2
    k_list = settings.get_int_list("k_list", [16, 32, 64, 128])
    amplitude = settings.get_float("amplitude", 1.0)
    settings.reject_unknown_keys()
    write_manifest(settings)
    spec = TailSpectrumSpec(
        decay=decay, trunc=max(k_list), amplitude=amplitude, seed=settings.seed
    )
    rows = [
        (row.trunc, row.norm_total, row.normsq_increment_per_lnk)
        for row in divergence_scan(spec, n, t, k_list)
    ]
    write_csv(
        settings.out_dir / "scan.csv",
        ["K", "norm_total", "norm_sq_increment_per_lnK"],
        rows,
    )
    return 0


def _oracle_trivial(settings: Settings) -> int:
    settings.values.setdefault("initial", "zero")
    config, omega0 = build_base(settings)
    direction = build_perturbation(settings, config.trunc)
    norm_index = settings.get_int("norm", 0)
    samples = settings.get_int("samples", 10)
    settings.reject_unknown_keys()
    write_manifest(settings)
    traj = run(config, omega0)
    times = np.linspace(0.0, config.t_end, samples + 1)
    record = amplification_curve(traj, direction, [norm_index], times)
    du0 = velocity_from_vorticity(direction)
    norm0 = sobolev_norm(du0, norm_index)
    rows = []
    for i, t in enumerate(record.times):
        analytic = sobolev_norm(heat_semigroup(du0, t, config.reynolds), norm_index) / norm0
        numeric = record.lambdas[norm_index][i]
        rows.append((t, numeric, analytic, abs(numeric - analytic)))
    write_csv(
        settings.out_dir / "oracle_trivial.csv",
        ["t", "lambda_numeric", "lambda_oracle", "abs_err"],
        rows,
    )
    return 0


def _oracle_couette(settings: Settings) -> int:
    width = settings.get_float("envelope_width", 2.0)
    t_values = settings.get_float_list("t_list", list(np.arange(5.0, 50.1, 5.0)))
    halfwidth = settings.get_float("x2_halfwidth", 10.0 * width)
    n_x1 = settings.get_int("n_x1", 16)
    n_x2 = settings.get_int("n_x2", 4096)
    settings.reject_unknown_keys()
    write_manifest(settings)
    x1 = np.linspace(0.0, 2.0 * math.pi, n_x1, endpoint=False)
    x2 = np.linspace(-halfwidth, halfwidth, n_x2, endpoint=False)

    def dw0(a, b):
        return np.sin(a) * np.exp(-(b**2) / (2.0 * width**2))

    norm_rows = []
    for t in t_values:
        vals = couette_inviscid_evolve(dw0, t, x1, x2)
        norm_rows.append(
            (t, strip_hk_norm(vals, halfwidth, 0),
             strip_hk_norm(vals, halfwidth, 1), strip_hk_norm(vals, halfwidth, 2))
        )
    write_csv(
        settings.out_dir / "oracle_couette.csv",
        ["t", "h0_norm", "h1_norm", "h2_norm"],
        norm_rows,
    )
    ts = np.array([r[0] for r in norm_rows])
    fit_rows = []
    for k, col in ((1, 2), (2, 3)):
        ys = np.array([r[col] for r in norm_rows])
        res = fit_power_law(ts, ys)
        fit_rows.append((k, res.params["exponent"], res.residual))
    write_csv(
        settings.out_dir / "oracle_couette_fit.csv",
        ["k", "fitted_exponent", "residual"],
        fit_rows,
    )
    return 0


def _oracle_shear_family(settings: Settings) -> int:
    gammas = settings.get_float_list("gamma_list", [0.6, 0.75, 1.0])
    t_values = settings.get_float_list("t_list", [0.25, 0.5, 1.0])
    re_values = settings.get_float_list("re_list", [100.0, 1000.0, 10000.0])
    settings.reject_unknown_keys()
    write_manifest(settings)
    rows = []
    for gamma in gammas:
        for t in t_values:
            for re in re_values:
                params = ShearFamilyParams(gamma=gamma, sigma=0.0, reynolds=re)
                norm = shear_family_dsigma_h3_norm(params, t)
                if is_divergent(norm):
                    rows.append((gamma, t, re, "DIVERGENT", "", ""))
                else:
                    bound = shear_family_lower_bound(gamma, t, re)
                    rows.append((gamma, t, re, norm, bound, norm - bound))
    write_csv(
        settings.out_dir / "oracle_exact_family.csv",
        ["gamma", "t", "re", "dsigma_h3_norm", "lower_bound", "margin"],
        rows,
    )
    return 0


def cmd_oracle(settings: Settings) -> int:
    name = settings.get_str("oracle")
    handlers = {
        "trivial": _oracle_trivial,
        "couette": _oracle_couette,
        "exact-family": _oracle_shear_family,
    }
    if name not in handlers:
        raise ConfigError(
            f"unknown oracle '{name}' (valid names: {', '.join(sorted(handlers))})"
        )
    return handlers[name](settings)


def cmd_sweep_re(settings: Settings) -> int:
    re_values = settings.get_float_list("re_list", [250.0, 500.0, 1000.0, 2000.0])
    norm_index = settings.get_int("norm", 0)
    spin_time = settings.get_float("spin_time", 0.0)
    probe_frac = settings.get_float("probe_fraction", 0.3)
    config, omega0 = build_base(settings)
    direction = build_perturbation(settings, config.trunc)
    t_probe = settings.get_float("t_probe", 0.0)
    settings.reject_unknown_keys()
    write_manifest(settings)
    if t_probe <= 0:
        t0_big = turnover_time(omega0, config.mean_flow)
        t_probe = config.dt * round(probe_frac * t0_big / config.dt)

    from .growth import reynolds_sweep

    def recipe(re):
        state0 = omega0
        if spin_time > 0:
            spin_cfg = SolverConfig(
                trunc=config.trunc, reynolds=re, dt=config.dt, t_end=spin_time,
                dealias=config.dealias, checkpoint_interval=10**9,
                mean_flow=config.mean_flow,
            )
            state0 = run(spin_cfg, omega0).states[-1]
        cfg = SolverConfig(
            trunc=config.trunc, reynolds=re, dt=config.dt, t_end=t_probe,
            dealias=config.dealias, checkpoint_interval=10**9,
            mean_flow=config.mean_flow,
        )
        return cfg, state0, direction

    result = reynolds_sweep(recipe, re_values, t_probe, norm_index)
    write_csv(
        settings.out_dir / "sweep.csv",
        ["re", "amplification", "failed"],
        [(r.reynolds, r.amplification, int(r.failed)) for r in result.rows],
    )
    payload = json.loads(result.fit.to_json())
    payload["t_probe"] = t_probe
    payload["norm_index"] = norm_index
    (settings.out_dir / "fit.json").write_text(json.dumps(payload, sort_keys=True) + "\n")
    print(json.dumps(payload, sort_keys=True))
    return 0


def cmd_fit(settings: Settings, csv_path: str, model: str) -> int:
    # a csv/model pair in the config (e.g. a manifest) wins over the CLI args
    settings.values.setdefault("csv", csv_path)
    settings.values.setdefault("model", model)
    csv_path = settings.get_str("csv")
    model = settings.get_str("model")
    x_col = settings.get_str("x_col", "")
    y_col = settings.get_str("y_col", "")
    settings.reject_unknown_keys()
    write_manifest(settings)
    header, rows = read_csv(csv_path)
    xi = header.index(x_col) if x_col else 0
    yi = header.index(y_col) if y_col else 1
    x = np.array([r[xi] for r in rows])
    y = np.array([r[yi] for r in rows])
    fitters = {
        "sqrt_exp": fit_sqrt_exponential,
        "exp": fit_exponential,
        "power": fit_power_law,
    }
    if model not in fitters:
        raise ConfigError(f"unknown model '{model}' (valid: {', '.join(sorted(fitters))})")
    try:
        result = fitters[model](x, y)
    except ValueError as err:
        raise ConfigError(f"cannot fit {model} to {csv_path}: {err}") from err
    (settings.out_dir / "fit.json").write_text(result.to_json() + "\n")
    print(result.to_json())
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    parser.add_argument(
        "--override", action="append", default=[], metavar="KEY=VALUE",
        help="override a config value (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusflow",
        description="2D spectral flow experiments: simulation, tangent growth, "
        "divergence scans, oracle tables, Reynolds sweeps, growth-law fits",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "tangent", "theorem-scan", "oracle", "sweep-re"):
        p = sub.add_parser(name)
        _add_common(p)
    p_fit = sub.add_parser("fit")
    p_fit.add_argument("csv", help="input CSV with at least two numeric columns")
    p_fit.add_argument(
        "--model", required=True, choices=["sqrt_exp", "exp", "power"]
    )
    _add_common(p_fit)
    return parser


def _resolve_settings(args) -> Settings:
    values: dict = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for item in args.override:
        if "=" not in item:
            raise ConfigError(f"--override expects key=value, got {item!r}")
        key, _, val = item.partition("=")
        values[key.strip()] = parse_value(val)
    command_in_file = values.pop("command", None)
    if command_in_file is not None and command_in_file != args.command:
        raise ConfigError(
            f"config file is for command '{command_in_file}', not '{args.command}'"
        )
    seed = values.pop("seed", args.seed)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return Settings(args.command, values, seed, out_dir)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        settings = _resolve_settings(args)
        if args.command == "simulate":
            return cmd_simulate(settings)
        if args.command == "tangent":
            return cmd_tangent(settings)
        if args.command == "theorem-scan":
            return cmd_theorem_scan(settings)
        if args.command == "oracle":
            return cmd_oracle(settings)
        if args.command == "sweep-re":
            return cmd_sweep_re(settings)
        if args.command == "fit":
            return cmd_fit(settings, args.csv, args.model)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except SimulationBlowupError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
