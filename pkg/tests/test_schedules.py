"""Schedule construction, inversion, normalization, and serialization."""

import json
import math

import numpy as np
import pytest

import advs
from advs import GroverInstance, build_schedule, gap
from advs.schedules import build_custom_schedule, canonical_kind


def closed_form_runtime(N: int, power: int) -> float:
    """Analytic (1/c=1) runtimes: int_0^1 dE^-p ds for p = 0, 1, 2.

    With u = s - 1/2 the gap is sqrt(1/N + 4 kappa u^2), kappa = 1 - 1/N,
    giving an arcsinh form for p = 1 and an arctan form for p = 2.
    """
    k = 1.0 - 1.0 / N
    if power == 0:
        return 1.0
    if power == 1:
        return math.asinh(math.sqrt(k * N)) / math.sqrt(k)
    if power == 2:
        return math.sqrt(N / k) * math.atan(math.sqrt(k * N))
    raise ValueError(power)


class TestBuildSchedule:
    def test_uniform_is_linear(self, inst4):
        sched = build_schedule("uniform", inst4, T=7.0)
        for t in (0.0, 1.4, 3.5, 7.0):
            assert sched.s_of_t(t) == pytest.approx(t / 7.0, abs=1e-12)

    def test_gap_squared_runtime_closed_form(self, inst1024):
        sched = build_schedule("gap-squared", inst1024, c=1.0)
        oracle = closed_form_runtime(1024, 2)
        assert oracle == pytest.approx(49.28939259030282, rel=1e-12)
        assert sched.T == pytest.approx(oracle, rel=1e-10)

    def test_gap_linear_runtime_closed_form(self, inst1024):
        sched = build_schedule("gap-linear", inst1024, c=1.0)
        assert sched.T == pytest.approx(closed_form_runtime(1024, 1), rel=1e-10)

    def test_given_T_is_respected(self, inst64):
        for kind in ("uniform", "gap-squared", "gap-linear"):
            sched = build_schedule(kind, inst64, T=33.0)
            assert sched.T == pytest.approx(33.0, rel=1e-12)

    def test_exactly_one_target(self, inst4):
        with pytest.raises(ValueError):
            build_schedule("uniform", inst4)
        with pytest.raises(ValueError):
            build_schedule("uniform", inst4, T=1.0, epsilon=0.1)
        with pytest.raises(ValueError):
            build_schedule("uniform", inst4, T=-1.0)

    def test_kind_aliases(self):
        assert canonical_kind("gap_squared") == "gap-squared"
        assert canonical_kind("GAP-LINEAR") == "gap-linear"
        with pytest.raises(ValueError):
            canonical_kind("quadratic")


class TestMaps:
    @pytest.mark.parametrize("kind", ["uniform", "gap-squared", "gap-linear"])
    def test_inverse_consistency(self, kind, inst64):
        sched = build_schedule(kind, inst64, T=25.0)
        t = np.linspace(0.0, 25.0, 173)
        back = sched.t_of_s(sched.s_of_t(t))
        assert np.max(np.abs(back - t)) < 1e-9 * 25.0

    def test_velocity_at_crossing(self, inst1024):
        sched = build_schedule("gap-squared", inst1024, c=0.37)
        assert sched.s_dot_of_s(0.5) == pytest.approx(0.37 / 1024.0, rel=1e-12)

    def test_midpoint_by_symmetry(self):
        # oracle: gap symmetry about s = 1/2 makes the time midpoint exact
        inst = GroverInstance.balanced(8)
        sched = build_schedule("gap-squared", inst, c=1.0)
        assert sched.s_of_t(sched.T / 2.0) == pytest.approx(0.5, abs=1e-11)

    @pytest.mark.parametrize("kind", ["uniform", "gap-squared", "gap-linear"])
    def test_monotone(self, kind, inst16):
        sched = build_schedule(kind, inst16, T=11.0)
        s = sched.s_of_t(np.linspace(0.0, 11.0, 501))
        assert np.all(np.diff(s) > 0)

    @pytest.mark.parametrize("kind", ["gap-squared", "gap-linear"])
    def test_time_reversal_symmetry(self, kind, inst64):
        sched = build_schedule(kind, inst64, T=40.0)
        t = np.linspace(0.0, 40.0, 97)
        lhs = sched.s_of_t(40.0 - t)
        rhs = 1.0 - sched.s_of_t(t)
        assert np.max(np.abs(lhs - rhs)) < 1e-6

    @pytest.mark.parametrize("kind", ["uniform", "gap-squared", "gap-linear"])
    def test_velocity_residual_on_grid(self, kind, inst64):
        # |ds/dt - c dE^p| by finite differences of the stored maps
        sched = build_schedule(kind, inst64, T=60.0)
        s = np.linspace(0.02, 0.98, 41)
        t = sched.t_of_s(s)
        dt = 60.0 * 1e-7
        fd = (sched.s_of_t(t + dt) - sched.s_of_t(t - dt)) / (2 * dt)
        target = sched.s_dot_of_s(s)
        assert np.max(np.abs(fd - target) / target) < 1e-6

    def test_domain_errors(self, uniform4_T10):
        with pytest.raises(ValueError):
            uniform4_T10.s_of_t(10.5)
        with pytest.raises(ValueError):
            uniform4_T10.t_of_s(1.5)


class TestNormalization:
    @pytest.mark.parametrize("kind,expected", [
        ("uniform", 1.0), ("gap-squared", 0.5)])
    def test_runtime_scaling_exponent(self, kind, expected):
        rows = advs.runtime_scaling_sweep(kind, range(4, 15), 0.1)
        fit = advs.fit_exponent([2.0 ** n for n, _ in rows], [T for _, T in rows])
        assert fit.exponent == pytest.approx(expected, abs=0.05)

    def test_gap_linear_log_correction(self):
        rows = advs.runtime_scaling_sweep("gap-linear", range(4, 15), 0.1)
        Ns = np.array([2.0 ** n for n, _ in rows])
        Ts = np.array([T for _, T in rows])
        coef, rss2 = advs.fit_with_log_regressor(Ns, Ts)
        assert coef[0] == pytest.approx(0.5, abs=0.05)
        lx, ly = np.log(Ns), np.log(Ts)
        A1 = np.column_stack([lx, np.ones_like(lx)])
        r1 = ly - A1 @ np.linalg.lstsq(A1, ly, rcond=None)[0]
        assert float(r1 @ r1) / rss2 > 5.0


class TestCustomTable:
    def test_linear_interpolation(self, inst16):
        sched = build_custom_schedule(inst16, [(0.0, 0.0), (4.0, 0.3), (10.0, 1.0)])
        assert sched.T == 10.0
        assert sched.s_of_t(2.0) == pytest.approx(0.15)
        assert sched.t_of_s(0.65) == pytest.approx(7.0)
        assert sched.s_dot_of_s(0.1) == pytest.approx(0.3 / 4.0)

    def test_phase_matches_quadrature(self, inst16):
        sched = build_custom_schedule(inst16, [(0.0, 0.0), (4.0, 0.3), (10.0, 1.0)])
        from conftest import richardson_trapezoid
        oracle = richardson_trapezoid(
            lambda t: gap(inst16, np.interp(t, [0, 4, 10], [0, 0.3, 1.0])), 0.0, 10.0)
        assert sched.phase(10.0) == pytest.approx(oracle, rel=1e-9)

    def test_rejects_non_monotone(self, inst16):
        with pytest.raises(ValueError):
            build_custom_schedule(inst16, [(0.0, 0.0), (4.0, 0.5), (3.0, 1.0)])
        with pytest.raises(ValueError):
            build_custom_schedule(inst16, [(0.0, 0.1), (4.0, 1.0)])


class TestSerialization:
    @pytest.mark.parametrize("kind", ["uniform", "gap-squared", "gap-linear"])
    def test_round_trip(self, kind, inst64):
        sched = build_schedule(kind, inst64, T=17.0)
        doc = advs.schedule_to_json(sched)
        back = advs.schedule_from_json(doc)
        assert back.kind == sched.kind
        assert back.T == pytest.approx(sched.T, rel=1e-12)
        for t in (0.0, 3.3, 9.9, 17.0):
            assert back.s_of_t(t) == pytest.approx(sched.s_of_t(t), abs=1e-10)

    def test_document_shape(self, uniform4_T10):
        doc = json.loads(advs.schedule_to_json(uniform4_T10))
        assert set(doc) == {"kind", "n_qubits", "marked", "T", "c", "grid"}
        grid = np.array(doc["grid"])
        assert grid[0, 0] == 0.0 and grid[-1, 1] == 1.0
        assert np.all(np.diff(grid[:, 0]) > 0)

    def test_custom_round_trip(self, inst16):
        sched = build_custom_schedule(inst16, [(0.0, 0.0), (4.0, 0.3), (10.0, 1.0)])
        back = advs.schedule_from_json(advs.schedule_to_json(sched))
        assert back.kind == "custom-table"
        assert back.s_of_t(2.0) == pytest.approx(0.15)
