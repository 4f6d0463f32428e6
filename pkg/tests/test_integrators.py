"""Quadrature engines: adaptive integration, oscillatory amplitudes,
saddle finding, and stationary phase."""

import math

import numpy as np
import pytest

import advs
from advs import (GroverInstance, adaptive_quad, build_schedule, find_saddles,
                  gap, oscillatory_amplitude, stationary_phase_amplitude_sq)
from advs.errors import BudgetExceededError, SaddleError
from advs.integrators import _gauss_cumulative, get_budget, reset_budget, set_budget
from conftest import richardson_trapezoid


class TestAdaptiveQuad:
    def test_constant(self):
        res = adaptive_quad(lambda x: 1.0, 0.0, 1.0)
        assert res.value == pytest.approx(1.0, rel=1e-14)
        assert res.evaluations > 0

    def test_gap_integral_against_trapezoid_oracle(self, inst4):
        oracle = richardson_trapezoid(lambda s: gap(inst4, s), 0.0, 1.0)
        assert oracle == pytest.approx(0.6900864990752366, rel=1e-10)
        res = adaptive_quad(lambda s: gap(inst4, float(s)), 0.0, 1.0,
                            points=[0.5])
        assert res.value == pytest.approx(oracle, rel=1e-10)

    def test_inverse_square_gap_matches_schedule_runtime(self, inst1024):
        res = adaptive_quad(lambda s: gap(inst1024, float(s)) ** -2, 0.0, 1.0,
                            tol=1e-12, points=[0.5])
        assert res.value == pytest.approx(49.28939259030282, rel=1e-9)

    def test_complex_integrand(self):
        res = adaptive_quad(lambda x: complex(math.cos(x), math.sin(x)),
                            0.0, math.pi)
        assert res.value == pytest.approx(0.0 + 2.0j, abs=1e-12)

    def test_nan_raises(self):
        with pytest.raises(ValueError):
            adaptive_quad(lambda x: float("nan"), 0.0, 1.0)

    def test_error_estimates_are_conservative(self):
        # battery of smooth integrands with known values; measured error
        # against a much tighter reference must not exceed the estimate
        cases = [
            (lambda x: x ** 7, 0.0, 1.0),
            (lambda x: math.exp(-50.0 * (x - 0.3) ** 2), 0.0, 1.0),
            (lambda x: 1.0 / (0.01 + x * x), -1.0, 1.0),
            (lambda x: math.sin(40.0 * x), 0.0, 1.0),
        ]
        for f, a, b in cases:
            loose = adaptive_quad(f, a, b, tol=1e-6)
            ref = adaptive_quad(f, a, b, tol=1e-13)
            measured = abs(loose.value - ref.value)
            assert measured <= max(loose.abs_error_estimate, 1e-14)

    def test_budget_enforced(self):
        set_budget(50)
        try:
            with pytest.raises(BudgetExceededError):
                for _ in range(10):
                    adaptive_quad(lambda x: math.sin(40.0 * x), 0.0, 1.0)
        finally:
            reset_budget()

    def test_budget_accounting(self):
        reset_budget()
        before = get_budget().used
        res = adaptive_quad(lambda x: x, 0.0, 1.0)
        assert get_budget().used - before == res.evaluations


class TestGaussCumulative:
    def test_integration_matrix_reproduces_antiderivative(self):
        x, w, S = _gauss_cumulative(12)
        vals = np.exp(x)
        anti = S @ vals
        np.testing.assert_allclose(anti, np.exp(x) - 1.0, rtol=1e-12)
        assert float(w @ vals) == pytest.approx(math.e - 1.0, rel=1e-12)


class TestOscillatoryAmplitude:
    def test_zero_runtime_limit(self, inst4):
        sched = build_schedule("uniform", inst4, T=1e-7)
        res = oscillatory_amplitude(inst4, sched, -0.5)
        assert abs(res.value) < 1e-7

    def test_against_riemann_oracle(self, inst4, uniform4_T10):
        # oracle: brute-force midpoint Riemann sum at 1e6 steps
        n = 1_000_000
        tt = (np.arange(n) + 0.5) * 10.0 / n
        s = tt / 10.0
        dE = gap(inst4, s)
        phi = np.cumsum(dE) * 10.0 / n - dE * 10.0 / (2 * n)
        g = (1.0 - s) / (2.0 * dE)
        oracle = np.sum(np.exp(1j * phi) * g) * 10.0 / n
        res = oscillatory_amplitude(inst4, uniform4_T10, 0.0)
        assert abs(res.value - oracle) / abs(oracle) < 1e-6
        assert res.abs_error_estimate < 1e-9 * abs(res.value)

    def test_positive_frequencies_suppressed(self):
        # no saddle above the band: the amplitude is boundary-dominated and
        # far below the resonant negative-frequency value
        inst = GroverInstance.balanced(8)
        sched = build_schedule("uniform", inst, T=3000.0)
        pos = abs(oscillatory_amplitude(inst, sched, +0.45).value) ** 2
        neg = abs(oscillatory_amplitude(inst, sched, -0.45).value) ** 2
        bound = (advs.transition_profile(inst, 0.0) / (0.45 + 1.0)) ** 2
        assert pos < 20.0 * bound
        assert pos < 1e-3 * neg

    def test_continuity_in_omega(self, inst64):
        sched = build_schedule("uniform", inst64, T=200.0)
        # |dA/domega| <= int t g dt <= T^2/2 * max g
        om = -0.4
        delta = 1e-6
        a1 = oscillatory_amplitude(inst64, sched, om).value
        a2 = oscillatory_amplitude(inst64, sched, om + delta).value
        bound = delta * 200.0 ** 2 / 2.0 * 0.5
        assert abs(a2 - a1) <= 2.0 * bound

    def test_panel_budget(self, inst1024):
        sched = build_schedule("uniform", inst1024, T=50000.0)
        with pytest.raises(BudgetExceededError):
            oscillatory_amplitude(inst1024, sched, -0.9, max_panels=100)


class TestSaddles:
    def test_below_gap_minimum_empty(self, inst1024):
        sched = build_schedule("uniform", inst1024, T=100.0)
        assert find_saddles(inst1024, sched, -0.5 * inst1024.gap_min) == []

    def test_positive_frequency_empty(self, inst1024):
        sched = build_schedule("uniform", inst1024, T=100.0)
        assert find_saddles(inst1024, sched, +0.3) == []

    def test_above_band_empty(self, inst1024):
        sched = build_schedule("uniform", inst1024, T=100.0)
        assert find_saddles(inst1024, sched, -1.3) == []

    def test_against_analytic_inversion(self):
        # oracle: s* = 1/2 +- (1/2) sqrt((w^2 - 1/N)/(1 - 1/N))
        inst = GroverInstance.balanced(20)
        sched = build_schedule("uniform", inst, T=100.0)
        for om in (-0.5, -0.13, -0.92):
            saddles = find_saddles(inst, sched, om)
            u = 0.5 * math.sqrt((om * om - 1.0 / inst.N) / (1.0 - 1.0 / inst.N))
            assert saddles[0].s_star == pytest.approx(0.5 - u, abs=1e-9)
            assert saddles[1].s_star == pytest.approx(0.5 + u, abs=1e-9)
            assert saddles[0].s_star + saddles[1].s_star == pytest.approx(1.0,
                                                                          abs=1e-9)
        # large-N limit at om = -0.5: s* -> 1/4, 3/4
        saddles = find_saddles(inst, sched, -0.5)
        assert saddles[0].s_star == pytest.approx(0.25, abs=1e-6)
        assert saddles[1].s_star == pytest.approx(0.75, abs=1e-6)

    def test_branches_and_curvature_signs(self, inst1024):
        sched = build_schedule("uniform", inst1024, T=100.0)
        before, after = find_saddles(inst1024, sched, -0.3)
        assert before.branch == "before_crossing"
        assert before.second_derivative < 0.0 < after.second_derivative
        assert before.t_star < after.t_star


class TestStationaryPhase:
    def test_no_saddle_flagged(self, inst1024):
        sched = build_schedule("uniform", inst1024, T=100.0)
        with pytest.raises(SaddleError):
            stationary_phase_amplitude_sq(inst1024, sched, +0.4)

    def test_degenerate_saddle_flagged(self, inst1024):
        sched = build_schedule("uniform", inst1024, T=100.0)
        with pytest.raises(SaddleError):
            stationary_phase_amplitude_sq(inst1024, sched,
                                          -1.5 * inst1024.gap_min)

    def test_asymptotic_coefficient_large_N(self):
        # pi / (2 N omega^2 s_dot) in the window dE_min << |omega| << 1
        inst = GroverInstance.balanced(20)
        sched = build_schedule("uniform", inst, T=1.0e7)
        sp = stationary_phase_amplitude_sq(inst, sched, -0.1)
        asym = math.pi / (2.0 * inst.N * 0.01 * (1.0 / 1.0e7))
        assert sp == pytest.approx(asym, rel=0.05)

    def test_matches_beat_averaged_direct(self, inst1024):
        sched = build_schedule("uniform", inst1024, T=20000.0)
        om = -0.5
        sp = stationary_phase_amplitude_sq(inst1024, sched, om)
        saddles = find_saddles(inst1024, sched, om)
        dt = saddles[1].t_star - saddles[0].t_star
        win = 4.0 * 2.0 * math.pi / dt
        oms = np.linspace(om - win / 2, om + win / 2, 25)
        direct = np.mean([abs(oscillatory_amplitude(inst1024, sched, o).value) ** 2
                          for o in oms])
        assert abs(sp - direct) / direct < 0.2
