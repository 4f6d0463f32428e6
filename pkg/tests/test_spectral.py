"""Spectral models, presets, channel weights, and correlation kernels."""

import math

import numpy as np
import pytest

import advs
from advs import (CouplingConfig, GroverInstance, MarkovianDelta, PowerLaw,
                  TabulatedGrid, correlation_kernel, effective_weight, f_eval,
                  preset)
from advs.errors import InfraredDivergenceError


class TestPowerLaw:
    def test_quadratic_value(self):
        model = PowerLaw(2.0, prefactor=1.0, uv_cutoff=1.0)
        assert f_eval(model, 0.5) == 0.25
        assert f_eval(model, -0.5) == 0.25

    def test_zero_outside_cutoffs(self):
        model = PowerLaw(2.0, prefactor=1.0, ir_cutoff=0.1, uv_cutoff=0.8)
        assert f_eval(model, 0.9) == 0.0
        assert f_eval(model, -0.95) == 0.0
        assert f_eval(model, 0.05) == 0.0
        om = np.linspace(-2.0, 2.0, 401)
        vals = f_eval(model, om)
        assert np.all(vals >= 0.0)
        assert np.all(vals[np.abs(om) > 0.8] == 0.0)

    def test_thermal_window_and_zero_t_suppression(self):
        warm = PowerLaw(1.0, temperature=math.inf)
        cold = PowerLaw(1.0, temperature=0.05)
        # deep inside the thermal window the Bose factor is 1
        assert f_eval(cold, 0.0005) == pytest.approx(f_eval(warm, 0.0005), rel=1e-2)
        # far above the temperature the weight is exponentially suppressed
        assert f_eval(cold, 0.9) < 1e-6 * f_eval(warm, 0.9)

    def test_validation(self):
        with pytest.raises(ValueError):
            PowerLaw(1.0, prefactor=-1.0)
        with pytest.raises(ValueError):
            PowerLaw(1.0, ir_cutoff=0.5, uv_cutoff=0.5)
        with pytest.raises(ValueError):
            PowerLaw(1.0, temperature=0.0)


class TestPresets:
    @pytest.mark.parametrize("name,d,p", [
        ("photon_thermal", 3, 2.0),
        ("photon_thermal", 2, 1.0),
        ("photon_thermal", 1, 0.0),
        ("phonon_thermal", 3, 0.0),
        ("phonon_thermal", 1, -2.0),
        ("photon_zero_temperature", 3, 3.0),
        ("phonon_zero_temperature", 1, -1.0),
    ])
    def test_exponents(self, name, d, p):
        model = preset(name, d)
        assert model.exponent == p

    def test_photon_3d_is_quadratic(self):
        model = preset("photon_thermal", 3)
        assert f_eval(model, 0.3) == pytest.approx(0.09, rel=1e-12)

    def test_phonon_1d_infrared_growth(self):
        model = preset("phonon_thermal", 1, prefactor=2.0)
        assert f_eval(model, 0.1) == pytest.approx(100.0 * 2.0, rel=1e-12)

    def test_ohmic_and_markovian(self):
        assert preset("ohmic").exponent == 1.0
        m = preset("markovian", strength=0.7)
        assert m.is_delta and m.strength == 0.7

    def test_unknown_names(self):
        with pytest.raises(ValueError):
            preset("squeezed_vacuum", 3)
        with pytest.raises(ValueError):
            preset("photon_thermal", 4)


class TestMarkovianDelta:
    def test_pointwise_eval_flagged(self):
        model = MarkovianDelta(2.0 * math.pi)
        assert model.flat
        with pytest.warns(UserWarning):
            assert f_eval(model, 0.3) == pytest.approx(1.0)

    def test_negative_strength_rejected(self):
        with pytest.raises(ValueError):
            MarkovianDelta(-1.0)


class TestEffectiveWeight:
    def test_common_bath_xx_is_n_squared(self):
        inst = GroverInstance(4, "0101")
        cfg = CouplingConfig(lam=0.01, instance=inst, topology="common")
        assert effective_weight(cfg)["xx"] == 16.0

    def test_common_bath_cross_terms_cancel_for_balanced_w(self):
        inst = GroverInstance(4, "0101")
        cfg = CouplingConfig(lam=0.01, instance=inst, topology="common")
        w = effective_weight(cfg)
        assert w["xz"] == 0.0 and w["zx"] == 0.0

    def test_independent_zz_is_n(self):
        inst = GroverInstance(4, "0110")
        cfg = CouplingConfig(lam=0.01, instance=inst, topology="independent")
        assert effective_weight(cfg)["zz"] == 4.0

    def test_permutation_invariance(self):
        a = GroverInstance(5, "00111")
        b = GroverInstance(5, "11100")
        for topo in ("common", "independent"):
            wa = effective_weight(CouplingConfig(0.01, a, topology=topo))
            wb = effective_weight(CouplingConfig(0.01, b, topology=topo))
            assert wa == wb

    def test_global_bit_flip_invariance_zz(self):
        a = GroverInstance(5, "00101")
        b = GroverInstance(5, "11010")
        for topo in ("common", "independent"):
            wa = effective_weight(CouplingConfig(0.01, a, topology=topo))
            wb = effective_weight(CouplingConfig(0.01, b, topology=topo))
            assert wa["zz"] == wb["zz"]
            assert wa["xx"] == wb["xx"]

    def test_total_weight_uses_model_channel_scales(self):
        inst = GroverInstance(4, "0101")
        model = PowerLaw(2.0, channel_weights={"xx": 0.5})
        cfg = CouplingConfig(0.01, inst, topology="independent",
                             channels=("xx", "zz"))
        # xx: 4 qubits * 0.5, zz: 4 qubits * 1.0
        assert advs.total_channel_weight(cfg, model) == pytest.approx(6.0)

    def test_coupling_validation(self):
        inst = GroverInstance(2, "01")
        with pytest.raises(ValueError):
            CouplingConfig(-0.1, inst)
        with pytest.raises(ValueError):
            CouplingConfig(0.01, inst, topology="ring")
        with pytest.raises(ValueError):
            CouplingConfig(0.01, inst, channels=("xy",))
        with pytest.warns(UserWarning):
            CouplingConfig(0.5, inst)


class TestTabulatedGrid:
    def test_box_is_sharp(self):
        box = TabulatedGrid.box(-0.5, -0.4, 2.0)
        assert f_eval(box, -0.45) == 2.0
        assert f_eval(box, -0.51) == 0.0
        assert f_eval(box, -0.39) == 0.0

    def test_from_csv(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("# omega, f\n-1.0,0.0\n0.0,1.0\n1.0,0.0\n")
        model = TabulatedGrid.from_csv(path)
        assert f_eval(model, 0.5) == pytest.approx(0.5)
        assert f_eval(model, 2.0) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            TabulatedGrid([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            TabulatedGrid([0.0, 1.0], [1.0, -1.0])


class TestCorrelationKernel:
    def test_delta_kernel_is_symbolic(self):
        kern = correlation_kernel(MarkovianDelta(3.0), tau_max=10.0)
        assert kern.is_delta and kern.delta_strength == 3.0
        with pytest.raises(ValueError):
            kern.evaluate(0.0)

    def test_flat_band_c0(self):
        # flat spectrum C on [-1, 1]: C(0) = 2 C
        model = PowerLaw(0.0, prefactor=1.5, uv_cutoff=1.0)
        kern = correlation_kernel(model, tau_max=8.0)
        assert kern.c0.real == pytest.approx(3.0, rel=1e-12)
        assert abs(kern.c0.imag) < 1e-14

    def test_flat_band_sinc_zero(self):
        # oracle: analytic transform of a box, C(tau) = 2 C sin(tau)/tau
        model = PowerLaw(0.0, prefactor=1.0, uv_cutoff=1.0)
        kern = correlation_kernel(model, tau_max=8.0)
        taus = np.array([math.pi, 1.1, 2.75])
        oracle = 2.0 * np.sin(taus) / taus
        np.testing.assert_allclose(kern.evaluate(taus).real, oracle, atol=1e-12)
        assert abs(kern.evaluate(np.array([math.pi]))[0]) < 1e-12

    def test_one_sided_box_against_analytic(self):
        lo, hi, h = -0.5, -0.4, 1.3
        kern = correlation_kernel(TabulatedGrid.box(lo, hi, h), tau_max=50.0)

        def oracle(tau):
            tau = np.asarray(tau, dtype=float) + 0j
            return np.where(tau == 0, h * (hi - lo),
                            h * (np.exp(-1j * lo * tau) - np.exp(-1j * hi * tau))
                            / (1j * tau))

        taus = np.linspace(-49.0, 49.0, 37)
        np.testing.assert_allclose(kern.evaluate(taus), oracle(taus),
                                   rtol=1e-9, atol=1e-12)

    def test_hermiticity(self):
        kern = correlation_kernel(TabulatedGrid.box(-0.6, -0.2, 1.0), tau_max=20.0)
        taus = np.linspace(0.0, 19.0, 61)
        np.testing.assert_allclose(kern.evaluate(-taus),
                                   np.conj(kern.evaluate(taus)), rtol=1e-12,
                                   atol=1e-14)

    def test_round_trip_recovers_spectrum(self):
        # thermally damped power law is effectively smooth and compact, so
        # the inverse transform converges quickly in tau_max
        model = PowerLaw(2.0, prefactor=1.0, uv_cutoff=1.0, temperature=0.12)
        tau_max = 400.0
        kern = correlation_kernel(model, tau_max=tau_max, grid_spacing=0.05)
        om = np.linspace(-0.8, 0.8, 33)
        phases = np.exp(1j * np.outer(om, kern.taus))
        wts = np.full(len(kern.taus), kern.spacing)
        wts[0] = wts[-1] = 0.5 * kern.spacing
        f_rec = (phases @ (kern.values * wts)).real / (2.0 * math.pi)
        f_true = f_eval(model, om)
        keep = f_true > 1e-3 * f_true.max()
        rel = np.abs(f_rec[keep] - f_true[keep]) / f_true[keep]
        assert np.max(rel) < 1e-3

    def test_infrared_divergence_detected(self):
        model = preset("phonon_thermal", 1)  # exponent -2, no infrared cutoff
        with pytest.raises(InfraredDivergenceError):
            correlation_kernel(model, tau_max=10.0)
        # a finite reservoir volume (infrared cutoff) restores the kernel
        ok = PowerLaw(-2.0, ir_cutoff=0.05, uv_cutoff=1.0)
        kern = correlation_kernel(ok, tau_max=10.0)
        assert kern.c0.real > 0.0

    def test_quad_error_estimate_is_small(self):
        kern = correlation_kernel(PowerLaw(2.0), tau_max=30.0)
        assert kern.quad_error < 1e-10
