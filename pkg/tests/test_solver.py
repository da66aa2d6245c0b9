"""Nonlinear solver: decay oracles, conservation, convergence, checkpoints."""

import math
import warnings

import numpy as np
import pytest

import torusflow as tf
from torusflow.oracles import ShearFamilyParams, shear_family_vorticity
from torusflow.solver import Stepper


def sine_vorticity(trunc, amplitude=1.0):
    return tf.SpectralField.from_modes(trunc, {(0, 1): amplitude / 2j})


def smooth_random_vorticity(trunc, seed, peak=4.0, target_urms=1.0):
    rng = np.random.default_rng(seed)
    w = tf.random_scalar_field(
        trunc, rng, profile=lambda r: r**2 * np.exp(-0.5 * (r / peak) ** 2)
    )
    urms = tf.sobolev_norm(tf.velocity_from_vorticity(w), 0) / (2 * math.pi)
    return w * (target_urms / urms)


class TestStep:
    def test_heat_decay_oracle(self):
        # omega0 = sin x2 has vanishing advection; exact solution decays by
        # e^{-t/Re}, which the integrating factor reproduces to roundoff
        cfg = tf.SolverConfig(trunc=16, reynolds=100.0, dt=1e-2, t_end=1.0)
        traj = tf.run(cfg, sine_vorticity(16))
        got = traj.states[-1].coeff(0, 1)
        assert abs(got - math.exp(-0.01) / 2j) < 1e-10

    def test_single_step_matches_run(self):
        cfg = tf.SolverConfig(trunc=8, reynolds=200.0, dt=1e-2, t_end=1e-2,
                              checkpoint_interval=1)
        w0 = smooth_random_vorticity(8, 3)
        s1 = tf.step(tf.SimulationState(t=0.0, omega=w0), cfg)
        traj = tf.run(cfg, w0)
        assert np.array_equal(s1.omega.coeffs, traj.states[-1].coeffs)
        assert s1.step_count == 1

    def test_truncation_mismatch(self):
        cfg = tf.SolverConfig(trunc=8, reynolds=100.0, dt=1e-2)
        with pytest.raises(ValueError):
            tf.step(tf.SimulationState(t=0.0, omega=tf.SpectralField.zeros(4)), cfg)

    def test_blowup_detected(self):
        # hugely under-resolved Euler step with violent amplitude
        cfg = tf.SolverConfig(trunc=16, reynolds=tf.INFINITE, dt=2.0, t_end=20.0)
        w0 = smooth_random_vorticity(16, 1, target_urms=50.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(tf.SimulationBlowupError):
                tf.run(cfg, w0)


class TestRun:
    def test_t_end_zero_single_checkpoint(self):
        cfg = tf.SolverConfig(trunc=8, reynolds=100.0, dt=1e-2, t_end=0.0)
        w0 = sine_vorticity(8)
        traj = tf.run(cfg, w0)
        assert len(traj.states) == 1
        assert np.array_equal(traj.states[0].coeffs, w0.coeffs)

    def test_temporal_convergence_order(self):
        # boosted decay oracle omega(t) = e^{-t/Re} sin(x2 - c t): the mean
        # flow activates the advection stages (the unboosted oracle is
        # integrated exactly by the viscous factor, see below)
        c = 0.5
        errors = []
        for dt in (0.1, 0.05, 0.025):
            cfg = tf.SolverConfig(trunc=8, reynolds=100.0, dt=dt, t_end=1.0,
                                  mean_flow=(0.0, c))
            traj = tf.run(cfg, sine_vorticity(8))
            target = math.exp(-0.01) * np.exp(-1j * c) / 2j
            errors.append(abs(traj.states[-1].coeff(0, 1) - target))
        order = math.log2(errors[0] / errors[1])
        assert order >= 2.0
        assert math.log2(errors[1] / errors[2]) >= 2.0

    def test_unboosted_oracle_exact(self):
        cfg = tf.SolverConfig(trunc=8, reynolds=100.0, dt=0.1, t_end=1.0)
        traj = tf.run(cfg, sine_vorticity(8))
        assert abs(traj.states[-1].coeff(0, 1) - math.exp(-0.01) / 2j) < 1e-12

    def test_inviscid_invariants(self):
        w0 = smooth_random_vorticity(32, 7)
        cfg = tf.SolverConfig(trunc=32, reynolds=tf.INFINITE, dt=1e-3, t_end=0.2,
                              checkpoint_interval=200)
        traj = tf.run(cfg, w0)
        d0 = tf.diagnostics(traj.initial_state())
        d1 = tf.diagnostics(tf.SimulationState(t=traj.t_end, omega=traj.states[-1]))
        assert abs(d1.energy - d0.energy) < 1e-9 * d0.energy
        assert abs(d1.enstrophy - d0.enstrophy) < 1e-9 * d0.enstrophy

    def test_viscous_energy_nonincreasing(self):
        w0 = smooth_random_vorticity(24, 5)
        cfg = tf.SolverConfig(trunc=24, reynolds=500.0, dt=2e-3, t_end=0.1,
                              checkpoint_interval=5)
        traj = tf.run(cfg, w0)
        energies = [
            tf.diagnostics(tf.SimulationState(t=t, omega=s)).energy
            for t, s in zip(traj.times, traj.states)
        ]
        assert all(b <= a for a, b in zip(energies, energies[1:]))

    def test_mean_vorticity_constant(self):
        w0 = smooth_random_vorticity(24, 9)
        cfg = tf.SolverConfig(trunc=24, reynolds=1000.0, dt=1e-3, t_end=0.1,
                              checkpoint_interval=100)
        traj = tf.run(cfg, w0)
        assert abs(traj.states[-1].coeff(0, 0) - w0.coeff(0, 0)) < 1e-13

    def test_deterministic_rerun(self):
        w0 = smooth_random_vorticity(16, 4)
        cfg = tf.SolverConfig(trunc=16, reynolds=800.0, dt=1e-3, t_end=0.05,
                              checkpoint_interval=50)
        a = tf.run(cfg, w0)
        b = tf.run(cfg, w0)
        assert np.array_equal(a.states[-1].coeffs, b.states[-1].coeffs)

    def test_reality_preserved_along_trajectory(self):
        w0 = smooth_random_vorticity(16, 6)
        cfg = tf.SolverConfig(trunc=16, reynolds=300.0, dt=1e-3, t_end=0.05,
                              checkpoint_interval=10)
        traj = tf.run(cfg, w0)
        for state in traj.states:
            assert state.reality_error() < 1e-14 * max(1.0, state.max_abs())

    def test_cfl_warning(self):
        w0 = smooth_random_vorticity(32, 2, target_urms=20.0)
        cfg = tf.SolverConfig(trunc=32, reynolds=100.0, dt=0.05, t_end=0.0)
        with pytest.warns(UserWarning, match="CFL"):
            tf.run(cfg, w0)


class TestShearFamilyTrajectory:
    def test_matches_closed_form(self):
        # quick variant of the full-accuracy acceptance run; the family is
        # truncated to the dealiased band (each mode evolves independently,
        # so the truncated series is itself an exact solution)
        K = 32
        n_modes = tf.dealias_cutoff(K)
        params = ShearFamilyParams(gamma=1.0, sigma=0.5, reynolds=100.0,
                                   n_modes=n_modes)
        w0 = tf.SpectralField(
            np.pad(shear_family_vorticity(params, 0.0).coeffs,
                   K - n_modes, mode="constant")
        )
        cfg = tf.SolverConfig(trunc=K, reynolds=100.0, dt=1e-3, t_end=0.25,
                              mean_flow=(0.0, 0.5), checkpoint_interval=250)
        traj = tf.run(cfg, w0)
        exact = np.pad(shear_family_vorticity(params, 0.25).coeffs,
                       K - n_modes, mode="constant")
        err = np.max(np.abs(traj.states[-1].coeffs - exact))
        assert err < 1e-8

    def test_rhs_residual_against_family(self):
        # the family satisfies the vorticity equation: the discrete right-hand
        # side must match the analytic time derivative coefficientwise
        # (dealiasing off: the full K band participates in the advection)
        params = ShearFamilyParams(gamma=1.0, sigma=0.5, reynolds=100.0, n_modes=24)
        t = 0.5
        w = shear_family_vorticity(params, t)
        cfg = tf.SolverConfig(trunc=24, reynolds=100.0, dt=1e-3,
                              mean_flow=(0.0, 0.5), dealias=False)
        stepper = Stepper(cfg)
        advection = stepper.rhs(w.coeffs)
        _, _, ksq = tf.wavenumbers(24)
        rhs = advection - ksq / 100.0 * w.coeffs
        K = 24
        n = np.arange(-K, K + 1)
        dwdt = (-(n**2) / 100.0 - 1j * n * 0.5) * w.coeffs[K, :]
        err = np.max(np.abs(rhs[K, :] - dwdt))
        assert err < 1e-12
        off_axis = np.delete(rhs, K, axis=0)
        assert np.max(np.abs(off_axis)) < 1e-14


class TestDiagnostics:
    def test_zero_field(self):
        d = tf.diagnostics(tf.SimulationState(t=0.0, omega=tf.SpectralField.zeros(8)))
        assert d.energy == 0.0 and d.enstrophy == 0.0 and d.palinstrophy == 0.0
        assert all(v == 0.0 for v in d.velocity_norms)

    def test_sine_values_by_hand(self):
        # omega = sin x2: u = (cos x2, 0); energy = enstrophy = palinstrophy = pi^2
        d = tf.diagnostics(tf.SimulationState(t=0.0, omega=sine_vorticity(8)))
        assert d.energy == pytest.approx(math.pi**2, rel=1e-13)
        assert d.enstrophy == pytest.approx(math.pi**2, rel=1e-13)
        assert d.palinstrophy == pytest.approx(math.pi**2, rel=1e-13)

    def test_norm_grading_nondecreasing(self):
        w0 = smooth_random_vorticity(12, 8)
        d = tf.diagnostics(tf.SimulationState(t=0.0, omega=w0))
        norms = d.velocity_norms
        assert all(b >= a for a, b in zip(norms, norms[1:]))


class TestCheckpointFormat:
    def test_bit_exact_round_trip(self, tmp_path):
        w0 = smooth_random_vorticity(10, 6)
        state = tf.SimulationState(t=0.375, omega=w0, step_count=12)
        path = tmp_path / "state.rdf"
        tf.write_checkpoint(path, state, 750.0)
        loaded, reynolds = tf.read_checkpoint(path)
        assert reynolds == 750.0
        assert loaded.t == 0.375
        assert np.array_equal(loaded.omega.coeffs, w0.coeffs)

    def test_euler_sentinel(self, tmp_path):
        state = tf.SimulationState(t=0.0, omega=sine_vorticity(4))
        path = tmp_path / "euler.rdf"
        tf.write_checkpoint(path, state, tf.INFINITE)
        _, reynolds = tf.read_checkpoint(path)
        assert math.isinf(reynolds)

    def test_layout(self, tmp_path):
        # magic RDF1, u32 version=1, u32 K, f64 Re, f64 t, then coefficients
        state = tf.SimulationState(t=2.0, omega=sine_vorticity(3))
        path = tmp_path / "layout.rdf"
        tf.write_checkpoint(path, state, 100.0)
        raw = path.read_bytes()
        assert raw[:4] == b"RDF1"
        assert int.from_bytes(raw[4:8], "little") == 1
        assert int.from_bytes(raw[8:12], "little") == 3
        assert np.frombuffer(raw[12:20], dtype="<f8")[0] == 100.0
        assert np.frombuffer(raw[20:28], dtype="<f8")[0] == 2.0
        assert len(raw) == 28 + 7 * 7 * 16

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.rdf"
        path.write_bytes(b"XXXX" + b"\0" * 64)
        with pytest.raises(ValueError, match="magic"):
            tf.read_checkpoint(path)


class TestConfigValidation:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            tf.SolverConfig(trunc=0, reynolds=100.0, dt=1e-2)
        with pytest.raises(ValueError):
            tf.SolverConfig(trunc=8, reynolds=-5.0, dt=1e-2)
        with pytest.raises(ValueError):
            tf.SolverConfig(trunc=8, reynolds=100.0, dt=0.0)
        with pytest.raises(ValueError):
            tf.SolverConfig(trunc=8, reynolds=100.0, dt=1e-2, t_end=-1.0)

    def test_inviscid_flag(self):
        cfg = tf.SolverConfig(trunc=8, reynolds=tf.INFINITE, dt=1e-2)
        assert cfg.inviscid
