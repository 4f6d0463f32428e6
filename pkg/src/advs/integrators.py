"""Quadrature engines: adaptive 1-d integration, phase-resolved oscillatory
time integrals, and stationary-phase (saddle-point) amplitudes.

The oscillatory workhorse evaluates

    a(omega) = int_0^T exp(i [omega t + Phi(t)]) g(t) dt,
    g(t) = (1 - s(t)) / (sqrt(N) dE(t)),

by splitting [0, T] into panels bounded in both phase variation and gap
variation and applying a fixed Gauss rule per panel, so the cost scales
with the total accumulated phase |omega| T + Phi(T) and the error is
controlled at every omega, including near the resonance omega + dE(t*) = 0.
Saddles of the phase exist only for omega < 0 with dE_min < |omega| < 1;
they come in mirror pairs about s = 1/2 and their incoherent sum

    sum_* 2 pi g(t*)^2 / |d(dE)/dt(t*)|

reproduces the beat-averaged |a(omega)|^2; in the window
dE_min << |omega| << 1 it reduces to pi / (2 N omega^2 s_dot(t*)).

A process-wide evaluation budget (settable from the ADVS_BUDGET environment
variable through the CLI) caps the total number of integrand evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _sx
from scipy.optimize import brentq

from .errors import BudgetExceededError, SaddleError
from .grover import GroverInstance, gap, gap_derivative, transition_profile

__all__ = [
    "QuadratureResult",
    "SaddlePoint",
    "adaptive_quad",
    "oscillatory_amplitude",
    "find_saddles",
    "stationary_phase_amplitude_sq",
    "get_budget",
    "set_budget",
    "reset_budget",
]


# -- evaluation budget --------------------------------------------------------

_DEFAULT_BUDGET = 2 ** 40


class _Budget:
    def __init__(self, limit: int):
        self.limit = int(limit)
        self.used = 0

    def consume(self, n: int):
        self.used += int(n)
        if self.used > self.limit:
            raise BudgetExceededError(
                f"integrand evaluation budget exhausted ({self.used} > {self.limit})")

    @property
    def remaining(self) -> int:
        return max(0, self.limit - self.used)


_budget = _Budget(_DEFAULT_BUDGET)


def set_budget(limit: int) -> None:
    """Install a fresh evaluation budget (total integrand calls allowed)."""
    global _budget
    _budget = _Budget(limit)


def reset_budget() -> None:
    set_budget(_DEFAULT_BUDGET)


def get_budget() -> _Budget:
    return _budget


# -- adaptive non-oscillatory quadrature ---------------------------------------

@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    abs_error_estimate: float
    evaluations: int


def adaptive_quad(func, a: float, b: float, tol: float = 1e-10, *,
                  points=None, limit: int = 200) -> QuadratureResult:
    """Adaptive Gauss-Kronrod integration of a real or complex integrand.

    Backed by QUADPACK; ``points`` marks interior breakpoints (peaks,
    kinks) for the subdivision.  NaN from the integrand raises ValueError,
    and every call is charged against the process evaluation budget.
    """
    if not a < b:
        raise ValueError("need a < b")
    calls = [0]

    def wrapped(x):
        calls[0] += 1
        v = func(x)
        if isinstance(v, complex):
            return v
        if math.isnan(v):
            raise ValueError(f"integrand returned NaN at x={x}")
        return v

    probe = wrapped(0.5 * (a + b))
    interior = None
    if points is not None:
        interior = sorted(p for p in points if a < p < b)
        if not interior:
            interior = None

    import warnings
    with warnings.catch_warnings():
        # roundoff-limited accuracy is reported through the error estimate
        warnings.simplefilter("ignore", _sx.IntegrationWarning)
        if isinstance(probe, complex):
            re, ere = _sx.quad(lambda x: wrapped(x).real, a, b, epsabs=tol,
                               epsrel=tol, limit=limit, points=interior)
            im, eim = _sx.quad(lambda x: wrapped(x).imag, a, b, epsabs=tol,
                               epsrel=tol, limit=limit, points=interior)
            value, err = complex(re, im), ere + eim
        else:
            value, err = _sx.quad(wrapped, a, b, epsabs=tol, epsrel=tol,
                                  limit=limit, points=interior)
    _budget.consume(calls[0])
    return QuadratureResult(value=value, abs_error_estimate=float(err),
                            evaluations=calls[0])


# -- oscillatory time integrals -------------------------------------------------

def _gauss_cumulative(n: int):
    """Nodes x (on [0,1]), weights w, and the cumulative integration matrix
    S with S[k, j] = int_0^{x_k} L_j, L_j the Lagrange basis on the nodes.

    S turns integrand samples at the Gauss points into the antiderivative
    at those same points: (S @ f) * h accumulates over a panel of width h.
    Built in the Legendre basis (samples -> coefficients -> integrated
    Legendre values), which keeps the construction well conditioned.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    k = np.arange(n)
    # P_k(x_i) table; value->coefficient map is exact for degree < n
    P = np.polynomial.legendre.legvander(x, n)  # (n, n+1)
    V = ((2.0 * k + 1.0) / 2.0)[:, None] * (P[:, :n].T * w[None, :])
    # antiderivatives from -1: int P_0 = x + 1, int P_k = (P_{k+1}-P_{k-1})/(2k+1)
    A = np.empty((n, n))
    A[:, 0] = x + 1.0
    for kk in range(1, n):
        A[:, kk] = (P[:, kk + 1] - P[:, kk - 1]) / (2.0 * kk + 1.0)
    # map to [0, 1]: half the interval length
    return 0.5 * (x + 1.0), 0.5 * w, 0.5 * (A @ V)


_PX12, _PW12, _PS12 = _gauss_cumulative(12)
_PX6, _PW6, _PS6 = _gauss_cumulative(6)

_SKELETON_TARGET = 192


def _panel_edges_s(instance, schedule, omega: float, phase_per_panel: float,
                   max_panels: int) -> np.ndarray:
    """Panel boundaries in s bounding per-panel phase variation.

    The skeleton is a decimated copy of the schedule's node table (which is
    refined around the crossing); each skeleton interval is split by its
    phase-variation bound max |omega + dE| * dt.
    """
    grid = schedule.grid
    stride = max(1, (len(grid) - 1) // _SKELETON_TARGET)
    keep = np.unique(np.concatenate([np.arange(0, len(grid), stride),
                                     [len(grid) - 1]]))
    t_nodes = grid[keep, 0]
    s_nodes = grid[keep, 1]
    dE = gap(instance, s_nodes)
    dt = np.diff(t_nodes)
    hi = np.maximum(np.abs(omega + dE[:-1]), np.abs(omega + dE[1:]))
    m = np.maximum(np.ceil(hi * dt / phase_per_panel), 1.0).astype(int)
    total = int(m.sum())
    if total > max_panels:
        raise BudgetExceededError(
            f"oscillatory integral needs {total} panels for omega={omega}, "
            f"budget allows {max_panels}; total phase too large")
    frac = np.concatenate([np.arange(1, k + 1) / k for k in m])
    starts = np.repeat(s_nodes[:-1], m)
    widths = np.repeat(np.diff(s_nodes), m)
    edges = np.empty(total + 1)
    edges[0] = s_nodes[0]
    edges[1:] = starts + frac * widths
    return edges


def oscillatory_amplitude(instance: GroverInstance, schedule, omega: float, *,
                          phase_per_panel: float = 2.5,
                          max_panels: int = 2_000_000) -> QuadratureResult:
    """The inner time integral a(omega), computed in the s variable.

    Substituting dt = ds / s_dot(s) makes every factor a forward evaluation
    (no inverse map in the hot path).  Per panel, the integrand samples at
    the Gauss points feed a cumulative integration matrix that yields t(s)
    and Phi(s) at those same points; the panel edges accumulate the exact
    per-panel integrals.  The error estimate repeats the whole evaluation
    with a 6-point rule.
    """
    edges = _panel_edges_s(instance, schedule, omega, phase_per_panel, max_panels)
    a = edges[:-1]
    h = np.diff(edges)
    npan = len(a)

    def rule(x01, w01, S):
        s_pt = a[:, None] + h[:, None] * x01[None, :]
        inv_vel = 1.0 / schedule.s_dot_of_s(s_pt)
        dE = gap(instance, s_pt)
        # antiderivatives of dt/ds and dE * dt/ds at the Gauss points
        t_pt = (inv_vel @ S.T) * h[:, None]
        phi_pt = ((dE * inv_vel) @ S.T) * h[:, None]
        seg_t = (inv_vel * w01[None, :]).sum(axis=1) * h
        seg_phi = ((dE * inv_vel) * w01[None, :]).sum(axis=1) * h
        t0 = np.concatenate([[0.0], np.cumsum(seg_t)[:-1]])
        phi0 = np.concatenate([[0.0], np.cumsum(seg_phi)[:-1]])
        t_pt += t0[:, None]
        phi_pt += phi0[:, None]
        g = (1.0 - s_pt) / (math.sqrt(instance.N) * dE)
        vals = np.exp(1j * (omega * t_pt + phi_pt)) * g * inv_vel
        return ((vals * w01[None, :]).sum(axis=1) * h).sum()

    fine = rule(_PX12, _PW12, _PS12)
    coarse = rule(_PX6, _PW6, _PS6)
    n_eval = npan * (len(_PX12) + len(_PX6))
    _budget.consume(n_eval)
    return QuadratureResult(value=complex(fine),
                            abs_error_estimate=float(abs(fine - coarse)),
                            evaluations=n_eval)


# -- saddle points ---------------------------------------------------------------

@dataclass(frozen=True)
class SaddlePoint:
    """A stationary point of omega t + Phi(t): dE(t*) = -omega."""

    t_star: float
    s_star: float
    second_derivative: float  # d(dE)/dt at t*
    branch: str  # "before_crossing" | "after_crossing"


def find_saddles(instance: GroverInstance, schedule, omega: float) -> list[SaddlePoint]:
    """Saddles of the oscillatory phase, found by bisection on each
    monotone half of the gap.

    Empty for omega >= 0 (no resonance: that would move energy from the
    ground-state system into the bath) and for |omega| outside
    (dE_min, 1); otherwise exactly two, mirror images about s = 1/2.
    """
    if omega >= 0.0:
        return []
    target = -omega
    if target <= instance.gap_min or target >= 1.0:
        return []

    def resid(s):
        return gap(instance, s) - target

    s_before = brentq(resid, 0.0, 0.5, xtol=1e-14, rtol=8.9e-16)
    saddles = []
    for s_star, branch in ((s_before, "before_crossing"),
                           (1.0 - s_before, "after_crossing")):
        t_star = float(schedule.t_of_s(s_star))
        d2 = float(schedule.s_dot_of_s(s_star) * gap_derivative(instance, s_star))
        saddles.append(SaddlePoint(t_star=t_star, s_star=float(s_star),
                                   second_derivative=d2, branch=branch))
    return saddles


def stationary_phase_amplitude_sq(instance: GroverInstance, schedule,
                                  omega: float) -> float:
    """Beat-averaged |a(omega)|^2 from the incoherent saddle sum.

    The two saddle contributions are added without their rapidly
    oscillating cross term, which averages out under any subsequent
    integral over omega.  Raises SaddleError when no saddle exists or when
    |omega| < 2 dE_min, where the saddles are too close to the gap minimum
    for the quadratic expansion to hold (callers fall back to direct
    quadrature below 3 dE_min anyway).
    """
    saddles = find_saddles(instance, schedule, omega)
    if not saddles:
        raise SaddleError(f"no stationary point for omega={omega} "
                          f"(need -1 < omega < -dE_min={-instance.gap_min:.3g})")
    if -omega < 2.0 * instance.gap_min:
        raise SaddleError(f"saddles degenerate at omega={omega}: within 2x of "
                          "the gap minimum; use direct quadrature")
    total = 0.0
    for sp in saddles:
        g = transition_profile(instance, sp.s_star)
        total += 2.0 * math.pi * g * g / abs(sp.second_derivative)
    return total
