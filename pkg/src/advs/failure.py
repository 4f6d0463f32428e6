"""Final-excited-state probability <P1(T)> at second order in the coupling.

Four independent routes to the same number:

* ``p1_time_domain``    -- the double time integral
      lam^2 W  int_0^T int_0^T C(t1 - t2) M(t1) conj(M(t2)) dt1 dt2
  with M(t) = -exp(-i Phi(t)) (1-s)/(sqrt(N) dE) and C the bath kernel;
  evaluated on a Simpson grid, grouping the double sum by the time
  difference so the inner correlation is a single FFT convolution.

* ``p1_frequency_domain`` -- the spectral form
      lam^2 W  int domega f(omega) |a(omega)|^2
  with a(omega) the phase-resolved oscillatory amplitude; refinement
  concentrates near omega = -dE_min where the resonance sits.

* ``p1_markovian``      -- the delta-correlated closed form
      lam^2 A W  int_0^T dt ((1-s)/(sqrt(N) dE))^2 = O(lam^2 sqrt(N)),
  a single adaptive quadrature in s.

* ``p1_asymptotic``     -- the two-regime estimate: a no-phase upper bound
  lam^2 W N int_{-dE_min}^{dE_min} f domega for the resonanceless window,
  plus the stationary-phase tail int_{dE_min}^{1} f(-w) |a|^2_saddle dw
  (direct quadrature is used below 3 dE_min where the saddles degenerate).

W is the channel/topology weight from the coupling configuration.  All
engines factor lam^2 and W out of the integrals, so the quadratic coupling
scaling is exact by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import InfraredDivergenceError
from .grover import GroverInstance, gap, transition_profile
from .integrators import (adaptive_quad, get_budget, oscillatory_amplitude,
                          stationary_phase_amplitude_sq)
from .spectral import (CorrelationKernel, CouplingConfig, SpectralModel,
                       correlation_kernel, total_channel_weight)

__all__ = [
    "FailureEstimate",
    "p1_time_domain",
    "p1_frequency_domain",
    "p1_markovian",
    "p1_asymptotic",
    "p1_scaling_law",
]

UNRELIABLE_FLAG = "perturbation theory unreliable"


@dataclass(frozen=True)
class FailureEstimate:
    """A <P1(T)> value with its method tag and numerical error estimate."""

    value: float
    method: str
    numerical_error: float
    breakdown: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.value < -1e-12:
            raise ValueError(f"probability estimate is negative: {self.value}")


def _finalize(raw: float, method: str, err: float, breakdown: dict) -> FailureEstimate:
    flags = (UNRELIABLE_FLAG,) if raw > 0.5 else ()
    return FailureEstimate(value=float(max(raw, 0.0)), method=method,
                           numerical_error=float(err), breakdown=breakdown,
                           flags=flags)


def _weight(coupling: CouplingConfig, model: SpectralModel | None) -> float:
    if model is None:
        from .spectral import effective_weight
        topo = effective_weight(coupling)
        return float(sum(topo[p] for p in coupling.channels))
    return total_channel_weight(coupling, model)


def _channel_breakdown(coupling, model, core: float) -> dict:
    from .spectral import effective_weight
    topo = effective_weight(coupling)
    out = {}
    for pair in coupling.channels:
        w = topo[pair] * (model.channel_weights.get(pair, 0.0) if model else 1.0)
        out[pair] = coupling.lam ** 2 * w * core
    return out


# -- Markovian closed form -----------------------------------------------------

def p1_markovian(instance: GroverInstance, schedule, coupling: CouplingConfig,
                 strength: float, model: SpectralModel | None = None) -> FailureEstimate:
    """Delta-correlated bath: single time integral of the squared transition
    profile, written in s with dt = ds / s_dot."""

    def integrand(s):
        g = transition_profile(instance, s)
        return g * g / schedule.s_dot_of_s(s)

    res = adaptive_quad(integrand, 0.0, 1.0, tol=1e-13, points=[0.5], limit=400)
    w = _weight(coupling, model)
    core = strength * res.value
    raw = coupling.lam ** 2 * w * core
    return _finalize(raw, "markovian", coupling.lam ** 2 * w * strength
                     * res.abs_error_estimate,
                     _channel_breakdown(coupling, model, core))


# -- time domain -----------------------------------------------------------------

def _simpson_weights(m: int, h: float) -> np.ndarray:
    # m odd (even number of intervals)
    w = np.ones(m)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _double_sum(kernel: CorrelationKernel, t_grid: np.ndarray,
                m_vals: np.ndarray, weights: np.ndarray) -> complex:
    """sum_{jk} w_j w_k C(t_j - t_k) M_j conj(M_k), grouped by diagonal."""
    u = weights * m_vals
    corr = fftconvolve(u, np.conj(u[::-1]))  # index r: sum_j u_j conj(u_{j-r+m-1})
    h = t_grid[1] - t_grid[0]
    m = len(t_grid)
    taus = (np.arange(len(corr)) - (m - 1)) * h
    cvals = kernel.evaluate(taus)
    return complex(np.sum(cvals * corr))


def p1_time_domain(instance: GroverInstance, schedule, coupling: CouplingConfig,
                   kernel: CorrelationKernel, *, grid_step: float | None = None,
                   model: SpectralModel | None = None) -> FailureEstimate:
    """Double time integral against the tabulated correlation kernel.

    A delta kernel degenerates to the diagonal line integral and matches
    the Markovian closed form.  Smooth kernels use a Simpson product grid;
    the error estimate compares against the same sum at double spacing.
    """
    T = schedule.T
    if kernel.is_delta:
        def integrand(t):
            g = transition_profile(instance, schedule.s_of_t(t))
            return g * g
        res = adaptive_quad(integrand, 0.0, T, tol=1e-13 * max(T, 1.0),
                            points=[schedule.t_of_s(0.5)], limit=400)
        w = _weight(coupling, model)
        core = kernel.delta_strength * res.value
        raw = coupling.lam ** 2 * w * core
        return _finalize(raw, "time-domain",
                         coupling.lam ** 2 * w * kernel.delta_strength
                         * res.abs_error_estimate,
                         _channel_breakdown(coupling, model, core))

    if kernel.taus is not None and kernel.taus[-1] < T * (1 - 1e-9):
        raise ValueError(f"kernel tabulated to tau_max={kernel.taus[-1]} < T={T}; "
                         "rebuild with tau_max >= T")

    if grid_step is None:
        # resolve both exp(-i Phi) (rate <= max dE = 1) and the kernel
        # oscillation (rate <= the spectral support edge)
        omega_max = 1.0
        if model is not None and not model.is_delta:
            lo, hi = model.support()
            omega_max = max(abs(lo), abs(hi))
        grid_step = min(2.0 * math.pi / (16.0 * (omega_max + 1.0)), T / 256.0)

    def run(step):
        m = int(np.ceil(T / step))
        if m % 2 == 1:
            m += 1
        t_grid = np.linspace(0.0, T, m + 1)
        s = schedule.s_of_t(t_grid)
        phi = schedule.phase_of_s(s)
        mvals = -np.exp(-1j * phi) * transition_profile(instance, s)
        wts = _simpson_weights(m + 1, t_grid[1] - t_grid[0])
        get_budget().consume(len(t_grid))
        return _double_sum(kernel, t_grid, mvals, wts)

    fine = run(grid_step)
    coarse = run(2.0 * grid_step)
    w = _weight(coupling, model)
    core = fine.real
    raw = coupling.lam ** 2 * w * core
    err = coupling.lam ** 2 * w * (abs(fine - coarse) + abs(fine.imag))
    return _finalize(raw, "time-domain", err,
                     _channel_breakdown(coupling, model, core))


# -- frequency domain -------------------------------------------------------------

def _omega_breakpoints(instance, lo, hi):
    dmin = instance.gap_min
    candidates = [-1.0, -3.0 * dmin, -2.0 * dmin, -dmin, -0.5 * dmin, 0.0,
                  0.5 * dmin, dmin, 1.0]
    return [p for p in candidates if lo < p < hi]


def p1_frequency_domain(instance: GroverInstance, schedule,
                        coupling: CouplingConfig, model: SpectralModel, *,
                        rel_tol: float = 1e-6) -> FailureEstimate:
    """Spectral-weight integral of f(omega) |a(omega)|^2.

    The omega quadrature carries breakpoints at the resonance thresholds
    (+-dE_min and multiples) where |a|^2 changes character.  Budget and
    infrared-divergence failures propagate to the caller.
    """
    if model.is_delta:
        raise ValueError("frequency-domain engine needs a spectral model with "
                         "finite support; use p1_markovian for delta baths")
    model.check_infrared()

    amp_errors = []

    def weighted(om):
        fw = model.f(om)
        if fw == 0.0:
            return 0.0
        amp = oscillatory_amplitude(instance, schedule, om)
        amp_errors.append(2.0 * abs(amp.value) * amp.abs_error_estimate * fw)
        return fw * (amp.value.real ** 2 + amp.value.imag ** 2)

    total = 0.0
    err = 0.0
    for lo, hi in model.pieces():
        res = adaptive_quad(weighted, lo, hi, tol=rel_tol,
                            points=_omega_breakpoints(instance, lo, hi), limit=300)
        total += res.value
        err += res.abs_error_estimate
    if amp_errors:
        err += float(np.max(amp_errors))

    w = _weight(coupling, model)
    from .spectral import effective_weight
    topo = effective_weight(coupling)
    breakdown = {pair: coupling.lam ** 2 * topo[pair]
                 * model.channel_weights.get(pair, 0.0) * total
                 for pair in coupling.channels}
    raw = coupling.lam ** 2 * w * total
    return _finalize(raw, "frequency-domain", coupling.lam ** 2 * w * err, breakdown)


# -- asymptotic estimate -----------------------------------------------------------

def p1_asymptotic(instance: GroverInstance, schedule, coupling: CouplingConfig,
                  model: SpectralModel) -> FailureEstimate:
    """Two-regime estimate: no-phase bound below the gap minimum plus the
    stationary-phase tail above it.

    Both terms are reported separately in the breakdown and summed for the
    value.  In the band dE_min < |omega| < 3 dE_min, where the saddle pair
    degenerates, the tail integrand falls back to direct oscillatory
    quadrature.
    """
    if model.is_delta:
        raise ValueError("asymptotic engine needs a spectral model with finite "
                         "support; use p1_markovian for delta baths")
    model.check_infrared()
    dmin = instance.gap_min
    lam2 = coupling.lam ** 2
    w = _weight(coupling, model)
    N = instance.N

    lo_sup, hi_sup = model.support()

    # term 1: all phases dropped in the resonance-free window
    a1, b1 = max(-dmin, lo_sup), min(dmin, hi_sup)
    if a1 < b1:
        res1 = adaptive_quad(model.f, a1, b1, tol=1e-12, limit=200)
        term1 = lam2 * w * N * res1.value
        err1 = lam2 * w * N * res1.abs_error_estimate
    else:
        term1, err1 = 0.0, 0.0

    # term 2: saddle tail over dE_min < Omega < 1
    cross = min(3.0 * dmin, 1.0)
    term2 = 0.0
    err2 = 0.0

    def direct_part(om_abs):
        fw = model.f(-om_abs)
        if fw == 0.0:
            return 0.0
        amp = oscillatory_amplitude(instance, schedule, -om_abs)
        return fw * (amp.value.real ** 2 + amp.value.imag ** 2)

    if dmin < cross:
        res = adaptive_quad(direct_part, dmin * (1.0 + 1e-12), cross,
                            tol=1e-9, limit=200)
        term2 += lam2 * w * res.value
        err2 += lam2 * w * res.abs_error_estimate

    def saddle_part(om_abs):
        fw = model.f(-om_abs)
        if fw == 0.0:
            return 0.0
        return fw * stationary_phase_amplitude_sq(instance, schedule, -om_abs)

    if cross < 1.0:
        res = adaptive_quad(saddle_part, cross, 1.0, tol=1e-9, limit=200)
        term2 += lam2 * w * res.value
        err2 += lam2 * w * res.abs_error_estimate

    raw = term1 + term2
    return _finalize(raw, "asymptotic", err1 + err2,
                     {"low_frequency": term1, "stationary_phase": term2})


def p1_scaling_law(instance: GroverInstance, model: SpectralModel,
                   coupling: CouplingConfig) -> float:
    """Schedule-independent order-of-magnitude law lam^2 f(-dE_min) / dE_min.

    Grows like sqrt(N) when f tends to a constant in the infrared, stays
    bounded at the f ~ omega threshold, and shrinks when f vanishes faster.
    """
    if model.is_delta:
        raise ValueError("scaling law needs a pointwise spectral weight")
    dmin = instance.gap_min
    return coupling.lam ** 2 * float(model.f(-dmin)) / dmin
