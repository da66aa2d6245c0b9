"""Translation-family derivative: coefficients, norm identity, tail scans."""

import math

import numpy as np
import pytest

import torusflow as tf
from torusflow.spectral import BOX_MEASURE


def sin_x2_velocity(trunc=4):
    return tf.SpectralField.from_modes(trunc, {(0, 1): (1 / 2j, 0.0)}, vector=True)


class TestTranslationDerivative:
    def test_t_zero_is_pure_boost(self):
        rng = np.random.default_rng(0)
        u = tf.random_vector_field(5, rng)
        for axis in (0, 1):
            d = tf.translation_derivative(u, 0.0, axis)
            expected = tf.SpectralField.from_modes(
                5, {(0, 0): (1.0, 0.0) if axis == 0 else (0.0, 1.0)}, vector=True
            )
            assert np.max(np.abs(d.coeffs - expected.coeffs)) == 0.0

    def test_sin_x2_coefficients(self):
        # modes (0, +-1) get scaled by -i k2 t = -+ i; boost fills component 2
        u = sin_x2_velocity()
        d = tf.translation_derivative(u, 1.0, axis=1)
        assert d.coeff(0, 1, 0) == pytest.approx(-1j * (1 / 2j), abs=1e-15)
        assert d.coeff(0, -1, 0) == pytest.approx(1j * (-1 / 2j), abs=1e-15)
        assert d.coeff(0, 0, 1) == pytest.approx(1.0)
        assert d.coeff(0, 0, 0) == pytest.approx(0.0)

    def test_finite_difference_cross_check(self):
        # first-order convergence of the shifted-family difference quotient
        rng = np.random.default_rng(6)
        u = tf.random_vector_field(6, rng)
        t = 0.7
        errors = []
        for eps in (1e-3, 1e-4):
            for axis, unit in ((0, (1.0, 0.0)), (1, (0.0, 1.0))):
                fd = (
                    tf.shift_and_boost(u, (eps * unit[0], eps * unit[1]), t)
                    - tf.shift_and_boost(u, (0.0, 0.0), t)
                ) * (1.0 / eps)
                d = tf.translation_derivative(u, t, axis)
                if axis == 0:
                    errors.append((eps, np.max(np.abs(fd.coeffs - d.coeffs))))
        (e1, err1), (e2, err2) = errors
        order = math.log(err1 / err2) / math.log(e1 / e2)
        assert order > 0.9

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            tf.translation_derivative(sin_x2_velocity(), 1.0, axis=2)


class TestNormIdentity:
    def test_hand_example(self):
        # u = (sin x2, 0), n = 3, t = 1, d = 2:
        # ||u||_4^2 - ||u||_0^2 = (2pi)^2 (5 - 1)/2 = 8 pi^2, total 16 pi^2
        u = sin_x2_velocity()
        total = tf.translation_derivative_normsq_total(u, 3, 1.0)
        assert total == pytest.approx(16.0 * math.pi**2, rel=1e-14)
        direct = tf.translation_derivative_normsq_direct(u, 3, 1.0)
        assert direct == pytest.approx(total, rel=1e-13)

    def test_t_zero_value(self):
        rng = np.random.default_rng(1)
        u = tf.random_vector_field(7, rng)
        assert tf.translation_derivative_normsq_total(u, 2, 0.0) == pytest.approx(
            2.0 * BOX_MEASURE, rel=1e-15
        )

    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4, 5])
    def test_closed_form_equals_direct_sum(self, n):
        rng = np.random.default_rng(100 + n)
        u = tf.random_vector_field(8, rng)
        for t in (0.0, 0.5, 1.0, 2.0):
            closed = tf.translation_derivative_normsq_total(u, n, t)
            direct = tf.translation_derivative_normsq_direct(u, n, t)
            assert abs(closed - direct) < 1e-12 * closed

    def test_monotone_in_t(self):
        rng = np.random.default_rng(2)
        u = tf.random_vector_field(6, rng)
        ts = [0.0, 0.3, 0.9, 1.5, 3.0]
        vals = [tf.translation_derivative_normsq_total(u, 3, t) for t in ts]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestTailSpectrum:
    def test_exact_amplitudes(self):
        spec = tf.TailSpectrumSpec(decay=5.0, trunc=12, amplitude=0.7, seed=3)
        u = tf.tail_spectrum_field(spec)
        k1, k2, ksq = tf.wavenumbers(12)
        r = np.sqrt(ksq)
        mags = np.sqrt(np.abs(u.coeffs[0]) ** 2 + np.abs(u.coeffs[1]) ** 2)
        expected = 0.7 * (1.0 + r) ** (-5.0)
        expected[12, 12] = 0.0
        assert np.max(np.abs(mags - expected)) < 1e-14

    def test_reality_and_divergence_free(self):
        spec = tf.TailSpectrumSpec(decay=4.0, trunc=10, seed=11)
        u = tf.tail_spectrum_field(spec)
        assert u.reality_error() < 1e-15
        assert u.divergence_error() < 1e-13

    def test_seed_reproducible(self):
        spec = tf.TailSpectrumSpec(decay=5.0, trunc=8, seed=9)
        a = tf.tail_spectrum_field(spec)
        b = tf.tail_spectrum_field(spec)
        assert np.array_equal(a.coeffs, b.coeffs)

    def test_validation(self):
        with pytest.raises(ValueError):
            tf.TailSpectrumSpec(decay=0.0, trunc=8)
        with pytest.raises(ValueError):
            tf.TailSpectrumSpec(decay=2.0, trunc=0)


def independent_scan_oracle(decay, n, t, trunc, amplitude=1.0):
    """Direct lattice summation of the closed identity, written from scratch."""
    total = 2 * (2 * math.pi) ** 2
    acc = 0.0
    for p1 in range(-trunc, trunc + 1):
        for p2 in range(-trunc, trunc + 1):
            if p1 == 0 and p2 == 0:
                continue
            rsq = float(p1 * p1 + p2 * p2)
            grading = 0.0
            power = 1.0
            for _ in range(n + 1):
                power *= rsq
                grading += power
            acc += grading * (amplitude * (1.0 + math.sqrt(rsq)) ** (-decay)) ** 2
    return total + t * t * (2 * math.pi) ** 2 * acc


class TestDivergenceScan:
    def test_borderline_log_growth(self):
        # decay = n + 1 + d/2: squared-norm increments per octave stay
        # roughly constant (log-divergence signature)
        n = 3
        spec = tf.TailSpectrumSpec(decay=float(n + 2), trunc=64, seed=0)
        rows = tf.divergence_scan(spec, n, 1.0, [8, 16, 32, 64])
        incs = [r.normsq_increment_per_lnk for r in rows[1:]]
        assert all(v > 0 for v in incs)
        shrink = [a / b for a, b in zip(incs, incs[1:])]
        assert all(0.5 < s < 1.5 for s in shrink)

    def test_matches_independent_summation(self):
        n = 3
        spec = tf.TailSpectrumSpec(decay=5.0, trunc=16, seed=0)
        rows = tf.divergence_scan(spec, n, 1.0, [8, 16])
        for row in rows:
            oracle = independent_scan_oracle(5.0, n, 1.0, row.trunc)
            assert row.norm_total**2 == pytest.approx(oracle, rel=1e-12)

    def test_convergent_control(self):
        n = 3
        spec = tf.TailSpectrumSpec(decay=float(n + 3), trunc=64, seed=0)
        rows = tf.divergence_scan(spec, n, 1.0, [8, 16, 32, 64])
        incs = [r.normsq_increment_per_lnk for r in rows[1:]]
        assert all(a / b >= 2.0 for a, b in zip(incs, incs[1:]))

    def test_t_zero_constant(self):
        spec = tf.TailSpectrumSpec(decay=5.0, trunc=32, seed=0)
        rows = tf.divergence_scan(spec, 3, 0.0, [8, 16, 32])
        for row in rows:
            assert row.norm_total**2 == pytest.approx(2 * (2 * math.pi) ** 2, rel=1e-14)

    def test_monotone_in_trunc(self):
        spec = tf.TailSpectrumSpec(decay=4.0, trunc=40, seed=2)
        rows = tf.divergence_scan(spec, 2, 0.5, [5, 10, 20, 40])
        totals = [r.norm_total for r in rows]
        assert all(b > a for a, b in zip(totals, totals[1:]))

    def test_non_increasing_list_rejected(self):
        spec = tf.TailSpectrumSpec(decay=5.0, trunc=16, seed=0)
        with pytest.raises(ValueError, match="increasing"):
            tf.divergence_scan(spec, 3, 1.0, [16, 8])
