"""Interpolation schedules s(t) and their inverses.

Three analytic families are supported, distinguished by the power p in
s_dot = c * dE(s)^p:

    uniform      p = 0   s_dot = 1/T,   runtime O(N) at fixed adiabatic error
    gap-linear   p = 1   s_dot = c*dE,  runtime O(sqrt(N) log N)
    gap-squared  p = 2   s_dot = c*dE^2, runtime O(sqrt(N))

plus a custom tabulated kind interpolated linearly between user-supplied
(t, s) pairs.  The forward map t(s) = (1/c) int_0^s dE^-p ds' is a plain
one-dimensional integral, so schedules are built by cumulative
Gauss-Legendre quadrature on a grid refined geometrically around the
avoided crossing at s = 1/2 (never by forward ODE stepping: the quadrature
is monotone by construction and has no stiffness).  The inverse s(t) is
obtained by Newton iteration on the quadrature-backed t(s), which makes
s_of_t and t_of_s mutually consistent to solver tolerance.

The same machinery accumulates the dynamical phase Phi(s) = (1/c)
int_0^s dE^{1-p} ds', cached per schedule and exposed through
``Schedule.phase`` / ``PhaseIntegral``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .grover import GroverInstance, adiabatic_coupling, gap

__all__ = [
    "UNIFORM",
    "GAP_LINEAR",
    "GAP_SQUARED",
    "CUSTOM_TABLE",
    "KINDS",
    "Schedule",
    "PhaseIntegral",
    "build_schedule",
    "build_custom_schedule",
    "runtime_scaling_sweep",
    "schedule_to_json",
    "schedule_from_json",
]

UNIFORM = "uniform"
GAP_LINEAR = "gap-linear"
GAP_SQUARED = "gap-squared"
CUSTOM_TABLE = "custom-table"
KINDS = (UNIFORM, GAP_LINEAR, GAP_SQUARED, CUSTOM_TABLE)

_GAP_POWER = {UNIFORM: 0, GAP_LINEAR: 1, GAP_SQUARED: 2}

_ALIASES = {
    "uniform": UNIFORM,
    "linear": UNIFORM,
    "gap-linear": GAP_LINEAR,
    "gap_linear": GAP_LINEAR,
    "gaplinear": GAP_LINEAR,
    "gap-squared": GAP_SQUARED,
    "gap_squared": GAP_SQUARED,
    "gapsquared": GAP_SQUARED,
    "custom-table": CUSTOM_TABLE,
    "custom_table": CUSTOM_TABLE,
    "custom": CUSTOM_TABLE,
}

# 12-point Gauss-Legendre rule on [0, 1], used for every panel integral.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W

_DEFAULT_NODE_BUDGET = 100_000


def canonical_kind(kind: str) -> str:
    try:
        return _ALIASES[kind.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown schedule kind {kind!r}; expected one of {KINDS}") from None


def _refined_grid(instance: GroverInstance, points_per_decade: int = 200,
                  node_budget: int = _DEFAULT_NODE_BUDGET) -> np.ndarray:
    """s-grid refined geometrically toward s = 1/2.

    Segment density follows the decades of dE: about ``points_per_decade``
    nodes per factor-of-ten change of the gap, which keeps the per-segment
    variation of any dE power small enough for the panel rule to be exact
    to roundoff.
    """
    n = instance.n_qubits
    u_min = 0.02 * instance.gap_min  # inside the flat bottom of the gap
    decades = math.log10(0.5 / u_min)
    n_geo = max(64, int(points_per_decade * decades))
    if 2 * n_geo + 256 > node_budget:
        raise ConvergenceError(
            f"schedule grid needs {2 * n_geo + 256} nodes, over budget {node_budget}"
        )
    levels = np.geomspace(u_min, 0.5, n_geo)
    backbone = np.linspace(0.0, 1.0, 257)
    grid = np.unique(np.concatenate([backbone, 0.5 - levels, [0.5], 0.5 + levels]))
    return np.clip(grid, 0.0, 1.0)


def _cumulative(nodes: np.ndarray, integrand) -> np.ndarray:
    """Cumulative integral of ``integrand`` over the node segments,
    one 12-point Gauss panel per segment."""
    a = nodes[:-1]
    h = np.diff(nodes)
    x = a[:, None] + h[:, None] * _GL_X[None, :]
    vals = integrand(x)
    seg = (vals * _GL_W[None, :]).sum(axis=1) * h
    out = np.empty_like(nodes)
    out[0] = 0.0
    np.cumsum(seg, out=out[1:])
    return out


@dataclass(frozen=True)
class PhaseIntegral:
    """Cached interpolant of Phi(t) = int_0^t dE(tau) dtau.

    ``max_error_estimate`` compares the 12-point panel rule against a
    6-point one on the worst segment; ``node_count`` is the size of the
    underlying s-grid.
    """

    schedule: "Schedule"
    node_count: int
    max_error_estimate: float

    def value(self, t):
        return self.schedule.phase(t)

    def derivative(self, t):
        return gap(self.schedule.instance, self.schedule.s_of_t(t))


class Schedule:
    """Monotone interpolation law with cached forward/inverse maps.

    Instances are immutable after construction and safe to share across
    parallel workers; all evaluation methods are pure and vectorized.
    """

    def __init__(self, kind: str, instance: GroverInstance, c: float,
                 s_nodes: np.ndarray, t_nodes: np.ndarray, phi_nodes: np.ndarray,
                 phase_error: float):
        self.kind = kind
        self.instance = instance
        self.c = float(c)
        self._s_nodes = s_nodes
        self._t_nodes = t_nodes
        self._phi_nodes = phi_nodes
        self.T = float(t_nodes[-1])
        self._phase_error = phase_error
        self._power = _GAP_POWER.get(kind)

    # -- velocity -----------------------------------------------------------

    def s_dot_of_s(self, s):
        """Velocity ds/dt as a function of s."""
        s = np.asarray(s, dtype=float)
        if self.kind == UNIFORM:
            out = np.full_like(s, 1.0 / self.T)
        else:
            out = self.c * np.asarray(gap(self.instance, s)) ** self._power
        return out if out.ndim else float(out)

    def s_dot(self, t):
        """Velocity ds/dt as a function of t."""
        return self.s_dot_of_s(self.s_of_t(t))

    # -- forward map t(s) ---------------------------------------------------

    def _inv_velocity(self, s):
        return 1.0 / self.s_dot_of_s(s)

    def t_of_s(self, s):
        """Time at which the sweep reaches s; cumulative node value plus a
        partial Gauss panel from the nearest node below."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0) or np.any(s > 1.0):
            raise ValueError("s outside [0, 1]")
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        idx = np.clip(np.searchsorted(self._s_nodes, s, side="right") - 1, 0,
                      len(self._s_nodes) - 2)
        a = self._s_nodes[idx]
        h = s - a
        x = a[:, None] + h[:, None] * _GL_X[None, :]
        part = (self._inv_velocity(x) * _GL_W[None, :]).sum(axis=1) * h
        out = self._t_nodes[idx] + part
        return float(out[0]) if scalar else out

    # -- inverse map s(t) ---------------------------------------------------

    def s_of_t(self, t):
        """Invert t(s) by Newton iteration seeded from the node table.

        Converges quadratically because dt/ds = 1/s_dot is smooth and
        strictly positive; bisection fallback guards pathological panels.
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < -1e-9 * self.T) or np.any(t > self.T * (1.0 + 1e-9)):
            raise ValueError(f"t outside [0, T={self.T}]")
        scalar = t.ndim == 0
        t = np.clip(np.atleast_1d(t).astype(float), 0.0, self.T)
        idx = np.clip(np.searchsorted(self._t_nodes, t, side="right") - 1, 0,
                      len(self._t_nodes) - 2)
        lo = self._s_nodes[idx].copy()
        hi = self._s_nodes[idx + 1].copy()
        frac = (t - self._t_nodes[idx]) / np.maximum(
            self._t_nodes[idx + 1] - self._t_nodes[idx], 1e-300)
        s = lo + frac * (hi - lo)
        tol = 1e-14 * max(self.T, 1.0)
        for _ in range(60):
            resid = self.t_of_s(s) - t
            done = np.abs(resid) <= tol
            if np.all(done):
                break
            hi = np.where(resid > 0.0, s, hi)
            lo = np.where(resid > 0.0, lo, s)
            step = resid * self.s_dot_of_s(s)
            s_new = s - step
            bad = (s_new <= lo) | (s_new >= hi)
            s = np.where(bad, 0.5 * (lo + hi), s_new)
        else:
            raise ConvergenceError("s_of_t Newton iteration did not converge")
        s = np.clip(s, 0.0, 1.0)
        return float(s[0]) if scalar else s

    # -- dynamical phase ----------------------------------------------------

    def phase_of_s(self, s):
        """Phi as a function of s (cumulative node value + partial panel)."""
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        idx = np.clip(np.searchsorted(self._s_nodes, s, side="right") - 1, 0,
                      len(self._s_nodes) - 2)
        a = self._s_nodes[idx]
        h = s - a
        x = a[:, None] + h[:, None] * _GL_X[None, :]
        integrand = gap(self.instance, x) * self._inv_velocity(x)
        part = (integrand * _GL_W[None, :]).sum(axis=1) * h
        out = self._phi_nodes[idx] + part
        return float(out[0]) if scalar else out

    def phase(self, t):
        """Accumulated dynamical phase Phi(t)."""
        return self.phase_of_s(self.s_of_t(t))

    @property
    def phase_integral(self) -> PhaseIntegral:
        return PhaseIntegral(self, len(self._s_nodes), self._phase_error)

    @property
    def total_phase(self) -> float:
        return float(self._phi_nodes[-1])

    # -- bookkeeping ---------------------------------------------------------

    @property
    def grid(self) -> np.ndarray:
        """(t, s) node table as an (n, 2) array."""
        return np.column_stack([self._t_nodes, self._s_nodes])

    def __repr__(self):
        return (f"Schedule(kind={self.kind!r}, n={self.instance.n_qubits}, "
                f"T={self.T:.6g}, c={self.c:.6g})")


class CustomSchedule(Schedule):
    """Tabulated monotone (t, s) pairs with linear interpolation."""

    def __init__(self, instance: GroverInstance, t_nodes: np.ndarray,
                 s_nodes: np.ndarray):
        t_nodes = np.asarray(t_nodes, dtype=float)
        s_nodes = np.asarray(s_nodes, dtype=float)
        if t_nodes.ndim != 1 or t_nodes.shape != s_nodes.shape or len(t_nodes) < 2:
            raise ValueError("custom table needs matching 1-d t and s arrays")
        if np.any(np.diff(t_nodes) <= 0) or np.any(np.diff(s_nodes) <= 0):
            raise ValueError("custom table must be strictly increasing in t and s")
        if abs(s_nodes[0]) > 1e-12 or abs(s_nodes[-1] - 1.0) > 1e-12 or t_nodes[0] != 0.0:
            raise ValueError("custom table must span s: 0 -> 1 starting at t = 0")
        phi = _cumulative_custom_phase(instance, t_nodes, s_nodes)
        super().__init__(CUSTOM_TABLE, instance, c=float("nan"),
                         s_nodes=s_nodes, t_nodes=t_nodes, phi_nodes=phi,
                         phase_error=1e-12 * max(phi[-1], 1.0))
        self._slopes = np.diff(s_nodes) / np.diff(t_nodes)

    def s_dot_of_s(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(self._s_nodes, s, side="right") - 1, 0,
                      len(self._slopes) - 1)
        out = self._slopes[idx]
        return out if out.ndim else float(out)

    def t_of_s(self, s):
        s = np.asarray(s, dtype=float)
        out = np.interp(s, self._s_nodes, self._t_nodes)
        return out if out.ndim else float(out)

    def s_of_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0) or np.any(t > self.T * (1.0 + 1e-9)):
            raise ValueError(f"t outside [0, T={self.T}]")
        out = np.interp(t, self._t_nodes, self._s_nodes)
        return out if out.ndim else float(out)

    def phase_of_s(self, s):
        return self.phase(self.t_of_s(s))

    def phase(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        idx = np.clip(np.searchsorted(self._t_nodes, t, side="right") - 1, 0,
                      len(self._t_nodes) - 2)
        a = self._t_nodes[idx]
        h = t - a
        x = a[:, None] + h[:, None] * _GL_X[None, :]
        svals = np.interp(x, self._t_nodes, self._s_nodes)
        part = (gap(self.instance, svals) * _GL_W[None, :]).sum(axis=1) * h
        out = self._phi_nodes[idx] + part
        return float(out[0]) if scalar else out


def _cumulative_custom_phase(instance, t_nodes, s_nodes):
    def integrand(t):
        return gap(instance, np.interp(t, t_nodes, s_nodes))
    return _cumulative(t_nodes, integrand)


def _normalization_constant(kind: str, instance: GroverInstance, epsilon: float,
                            grid: np.ndarray) -> float:
    """Velocity scale c holding the adiabatic error estimate at epsilon.

    The estimate is s_dot * |<E1|dH/ds|E0>| / dE^2 = c * coupling * dE^(p-2),
    linear in c, so c = epsilon / max_s(coupling * dE^(p-2)).
    """
    p = _GAP_POWER[kind]
    dE = gap(instance, grid)
    profile = adiabatic_coupling(instance, grid) * dE ** (p - 2)
    return epsilon / float(np.max(profile))


def build_schedule(kind: str, instance: GroverInstance, *, T: float | None = None,
                   c: float | None = None, epsilon: float | None = None,
                   points_per_decade: int = 200,
                   node_budget: int = _DEFAULT_NODE_BUDGET) -> Schedule:
    """Construct a schedule from exactly one normalization target.

    ``T`` fixes the total runtime, ``c`` the velocity scale, ``epsilon`` the
    adiabatic error estimate.  For the uniform kind c is reported as 1/T.
    """
    kind = canonical_kind(kind)
    if kind == CUSTOM_TABLE:
        raise ValueError("use build_custom_schedule for tabulated schedules")
    given = [x is not None for x in (T, c, epsilon)]
    if sum(given) != 1:
        raise ValueError("specify exactly one of T, c, epsilon")
    if T is not None and T <= 0:
        raise ValueError("T must be positive")
    if c is not None and c <= 0:
        raise ValueError("c must be positive")
    if epsilon is not None and epsilon <= 0:
        raise ValueError("epsilon must be positive")

    grid = _refined_grid(instance, points_per_decade, node_budget)
    p = _GAP_POWER[kind]

    def inv_vel_unit(s):  # dt/ds at c = 1
        return gap(instance, s) ** (-p)

    t_unit = _cumulative(grid, inv_vel_unit)
    if epsilon is not None:
        c = _normalization_constant(kind, instance, epsilon, grid)
    elif T is not None:
        c = t_unit[-1] / T
    t_nodes = t_unit / c

    def phase_integrand(s):
        return gap(instance, s) ** (1 - p)

    phi_nodes = _cumulative(grid, phase_integrand) / c

    # error estimate: worst-segment difference between the 12-point rule and
    # a 6-point one on the phase integrand
    mid = len(grid) // 2
    seg = (grid[mid], grid[mid + 1])
    x6, w6 = np.polynomial.legendre.leggauss(6)
    x6 = seg[0] + (seg[1] - seg[0]) * 0.5 * (x6 + 1.0)
    v6 = float(np.sum(phase_integrand(x6) * 0.5 * w6) * (seg[1] - seg[0])) / c
    v12 = float(phi_nodes[mid + 1] - phi_nodes[mid])
    phase_error = abs(v12 - v6) * len(grid)

    return Schedule(kind, instance, c, grid, t_nodes, phi_nodes, phase_error)


def build_custom_schedule(instance: GroverInstance, pairs) -> CustomSchedule:
    """Schedule from explicit monotone (t, s) pairs, linear in between."""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must be an (n, 2) array of (t, s)")
    return CustomSchedule(instance, arr[:, 0], arr[:, 1])


def runtime_scaling_sweep(kind: str, n_list, epsilon: float):
    """Runtimes T(n) at fixed adiabatic error, one row (n, T) per size."""
    kind = canonical_kind(kind)
    rows = []
    for n in n_list:
        inst = GroverInstance.balanced(int(n))
        sched = build_schedule(kind, inst, epsilon=epsilon)
        rows.append((int(n), sched.T))
    return rows


# -- serialization -----------------------------------------------------------

_GRID_EXPORT_MAX = 513


def schedule_to_json(schedule: Schedule, max_grid_points: int = _GRID_EXPORT_MAX) -> str:
    g = schedule.grid
    if len(g) > max_grid_points:
        stride = int(np.ceil(len(g) / max_grid_points))
        keep = np.unique(np.concatenate([np.arange(0, len(g), stride), [len(g) - 1]]))
        g = g[keep]
    doc = {
        "kind": schedule.kind,
        "n_qubits": schedule.instance.n_qubits,
        "marked": schedule.instance.marked,
        "T": schedule.T,
        "c": schedule.c,
        "grid": [[float(t), float(s)] for t, s in g],
    }
    return json.dumps(doc, indent=2)


def schedule_from_json(text: str) -> Schedule:
    doc = json.loads(text)
    instance = GroverInstance(int(doc["n_qubits"]), doc["marked"])
    kind = canonical_kind(doc["kind"])
    if kind == CUSTOM_TABLE:
        return build_custom_schedule(instance, doc["grid"])
    return build_schedule(kind, instance, c=float(doc["c"]))
