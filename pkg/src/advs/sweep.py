"""Parameter sweeps over qubit count, schedule, and bath preset, plus the
scaling-exponent fits that turn the rows into verdicts.

The pipeline is deterministic end to end (no randomness anywhere), so two
runs of the same spec produce identical rows; wall-clock timing is off by
default and stored as zero to keep emitted CSV byte-reproducible.

Exponents are fitted on ln N so the headline powers (failure probability
~ N^{+1/2} for a flat infrared spectrum, ~ N^{-1/2} for f ~ omega^2, flat
at the f ~ omega threshold) read off directly.  Classification removes the
known qubit-sum channel weight from the fitted quantity first: that factor
is poly(n), exactly the sub-leading correction the marginal diagnostics
then refit against ln n.
"""

from __future__ import annotations

import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import NumericalError
from .failure import (p1_asymptotic, p1_frequency_domain, p1_markovian,
                      p1_time_domain)
from .grover import GroverInstance
from .schedules import build_schedule, canonical_kind
from .spectral import (CouplingConfig, MarkovianDelta, correlation_kernel,
                       preset, total_channel_weight)

__all__ = [
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "ExponentFit",
    "run_sweep",
    "fit_exponent",
    "fit_with_log_regressor",
    "threshold_report",
    "rows_to_csv",
    "result_to_json",
    "rows_to_dat",
]

METHODS = ("markovian", "frequency", "asymptotic", "time")

CSV_COLUMNS = ("n", "N", "schedule", "preset", "method", "T", "gap_min",
               "p1", "err", "seconds")


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep: sizes, schedules, presets, coupling, and methods."""

    n_values: tuple[int, ...]
    schedule_kinds: tuple[str, ...] = ("gap-squared",)
    presets: tuple[str, ...] = ("markovian",)
    preset_dimension: int | None = None
    lam: float = 0.01
    epsilon: float = 0.1
    methods: tuple[str, ...] = ("markovian",)
    topology: str = "independent"
    channels: tuple[str, ...] = ("xx",)
    delta_strength: float = 1.0
    rel_tol: float = 1e-5

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_values)
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n_values must be nonempty and strictly increasing")
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 0.5)")
        for k in self.schedule_kinds:
            canonical_kind(k)
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")

    def combinations(self):
        for n in self.n_values:
            for kind in self.schedule_kinds:
                for pr in self.presets:
                    for method in self.methods:
                        yield (int(n), canonical_kind(kind), pr, method)


@dataclass(frozen=True)
class SweepRow:
    n: int
    N: int
    schedule: str
    preset: str
    method: str
    T: float
    gap_min: float
    p1: float
    err: float
    seconds: float
    weight: float = 1.0
    failure: str | None = None


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]
    fits: dict = field(default_factory=dict)

    def select(self, **kw) -> list[SweepRow]:
        out = []
        for r in self.rows:
            if r.failure is None and all(getattr(r, k) == v for k, v in kw.items()):
                out.append(r)
        return out


def _parse_preset(name: str) -> tuple[str, int | None]:
    """Split an optional trailing dimension: "photon_thermal(3)" or
    "photon_thermal_3" -> ("photon_thermal", 3)."""
    name = name.strip()
    if name.endswith(")") and "(" in name:
        base, _, d = name[:-1].partition("(")
        return base.strip(), int(d)
    parts = name.rsplit("_", 1)
    if len(parts) == 2 and parts[1].isdigit():
        return parts[0], int(parts[1])
    return name, None


def _preset_model(name: str, dimension: int | None, delta_strength: float):
    base, embedded = _parse_preset(name)
    if base == "markovian":
        return preset("markovian", strength=delta_strength)
    if base == "ohmic":
        return preset(base)
    return preset(base, embedded if embedded is not None else dimension)


def _compute_row(args) -> SweepRow:
    (n, kind, preset_name, method, dim, lam, eps, topology, channels,
     delta_strength, rel_tol, timing) = args
    inst = GroverInstance.balanced(n)
    t0 = time.perf_counter()
    try:
        sched = build_schedule(kind, inst, epsilon=eps)
        coupling = CouplingConfig(lam=lam, instance=inst, topology=topology,
                                  channels=tuple(channels))
        model = _preset_model(preset_name, dim, delta_strength)
        weight = total_channel_weight(coupling, model)
        if method == "markovian":
            if not model.is_delta:
                raise ValueError("markovian method needs the markovian preset")
            est = p1_markovian(inst, sched, coupling, model.strength, model=model)
        elif method == "frequency":
            est = p1_frequency_domain(inst, sched, coupling, model, rel_tol=rel_tol)
        elif method == "asymptotic":
            est = p1_asymptotic(inst, sched, coupling, model)
        elif method == "time":
            kern = correlation_kernel(model, tau_max=sched.T * 1.01)
            est = p1_time_domain(inst, sched, coupling, kern, model=model)
        else:  # pragma: no cover - guarded by SweepSpec validation
            raise ValueError(method)
        dt = time.perf_counter() - t0 if timing else 0.0
        return SweepRow(n=n, N=inst.N, schedule=kind, preset=preset_name,
                        method=method, T=sched.T, gap_min=inst.gap_min,
                        p1=est.value, err=est.numerical_error, seconds=dt,
                        weight=weight)
    except (NumericalError, ValueError) as exc:
        dt = time.perf_counter() - t0 if timing else 0.0
        return SweepRow(n=n, N=2 ** n, schedule=kind, preset=preset_name,
                        method=method, T=float("nan"), gap_min=2.0 ** (-n / 2),
                        p1=float("nan"), err=float("nan"), seconds=dt,
                        weight=float("nan"), failure=f"{type(exc).__name__}: {exc}")


def run_sweep(spec: SweepSpec, jobs: int = 1, timing: bool = False) -> SweepResult:
    """Compute every (n, schedule, preset, method) combination.

    Per-row failures are recorded in the row instead of aborting the sweep.
    Rows are returned in spec order regardless of completion order; with
    ``jobs > 1`` rows are computed in worker processes.
    """
    tasks = [(n, kind, pr, method, spec.preset_dimension, spec.lam, spec.epsilon,
              spec.topology, spec.channels, spec.delta_strength, spec.rel_tol,
              timing)
             for (n, kind, pr, method) in spec.combinations()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_compute_row, tasks))
    else:
        rows = [_compute_row(t) for t in tasks]
    result = SweepResult(spec=spec, rows=rows)
    result.fits = _fit_all(result)
    return result


# -- fits ------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    stderr: float
    r_squared: float
    points: int


def fit_exponent(xs, ys) -> ExponentFit:
    """Least-squares slope of ln y against ln x.

    Standard error from the residual variance; refuses degenerate x data
    and requires at least 4 points, all y > 0.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 4:
        raise ValueError("need at least 4 points for a slope fit")
    if np.any(ys <= 0) or np.any(xs <= 0):
        raise ValueError("fit needs positive x and y values")
    lx, ly = np.log(xs), np.log(ys)
    if np.ptp(lx) == 0.0:
        raise ValueError("degenerate x values: all equal")
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    fitted = A @ coef
    resid = ly - fitted
    dof = max(len(xs) - 2, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(exponent=float(coef[0]), stderr=float(math.sqrt(cov[0, 0])),
                       r_squared=r2, points=len(xs))


def fit_with_log_regressor(xs, ys):
    """Fit ln y = a ln x + g ln(ln x) + b; returns ((a, g, b), rss).

    The extra regressor captures logarithmic prefactors such as the
    ln N factor in gap-linear runtimes.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    lx, ly = np.log(xs), np.log(ys)
    A = np.column_stack([lx, np.log(lx), np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return tuple(float(c) for c in coef), float(resid @ resid)


def _fit_all(result: SweepResult) -> dict:
    fits = {}
    for kind in result.spec.schedule_kinds:
        kindc = canonical_kind(kind)
        for pr in result.spec.presets:
            for method in result.spec.methods:
                rows = result.select(schedule=kindc, preset=pr, method=method)
                if len(rows) < 4:
                    continue
                key = f"{kindc}/{pr}/{method}"
                Ns = [r.N for r in rows]
                try:
                    fits[key] = {
                        "p1": asdict(fit_exponent(Ns, [r.p1 for r in rows])),
                        "p1_per_weight": asdict(fit_exponent(
                            Ns, [r.p1 / r.weight for r in rows])),
                        "T": asdict(fit_exponent(Ns, [r.T for r in rows])),
                    }
                except ValueError:
                    continue
    return fits


# -- infrared classification -------------------------------------------------------

SCALABLE = "scalable"
MARGINAL = "marginal"
NON_SCALABLE = "non-scalable"


def threshold_report(result: SweepResult, *, band: float = 0.1) -> dict:
    """Classify each preset by the fitted exponent of the weight-normalized
    failure probability: below -band scalable, above +band non-scalable,
    inside the band marginal.

    Marginal presets get poly(n) diagnostics: the raw p1/lam^2 values are
    refitted with an ln n regressor and the residual improvement over the
    pure power law is reported.
    """
    out = {}
    lam2 = result.spec.lam ** 2
    for pr in result.spec.presets:
        rows = [r for r in result.rows
                if r.preset == pr and r.failure is None and np.isfinite(r.p1)]
        if len(rows) < 4:
            out[pr] = {"classification": "insufficient-rows", "rows": len(rows)}
            continue
        Ns = np.array([r.N for r in rows], dtype=float)
        per_weight = np.array([r.p1 / r.weight for r in rows])
        fit = fit_exponent(Ns, per_weight)
        if fit.exponent < -band:
            cls = SCALABLE
        elif fit.exponent > band:
            cls = NON_SCALABLE
        else:
            cls = MARGINAL
        entry = {"classification": cls, "exponent": fit.exponent,
                 "stderr": fit.stderr, "r_squared": fit.r_squared}
        if cls == MARGINAL:
            raw = np.array([r.p1 for r in rows]) / lam2
            ns = np.array([r.n for r in rows], dtype=float)
            plain = fit_exponent(Ns, raw)
            lx = np.log(Ns)
            A1 = np.column_stack([lx, np.ones_like(lx)])
            r1 = np.log(raw) - A1 @ np.linalg.lstsq(A1, np.log(raw), rcond=None)[0]
            A2 = np.column_stack([lx, np.log(ns), np.ones_like(lx)])
            r2 = np.log(raw) - A2 @ np.linalg.lstsq(A2, np.log(raw), rcond=None)[0]
            rss1, rss2 = float(r1 @ r1), float(r2 @ r2)
            entry["poly_n"] = {
                "raw_exponent": plain.exponent,
                "rss_power_law": rss1,
                "rss_with_log_n": rss2,
                "improvement": rss1 / rss2 if rss2 > 0 else math.inf,
            }
        out[pr] = entry
    return out


# -- emission -----------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def rows_to_dat(rows) -> str:
    """gnuplot-ready whitespace columns with a # header."""
    buf = io.StringIO()
    buf.write("# " + " ".join(CSV_COLUMNS) + "\n")
    for r in rows:
        buf.write(" ".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def result_to_json(result: SweepResult, *, timestamp: str | None = None) -> str:
    doc = {
        "header": {"generated_at": timestamp or "", "tool": "advs"},
        "spec": asdict(result.spec),
        "fits": result.fits,
        "threshold_report": threshold_report(result)
        if any(not _preset_model(p, result.spec.preset_dimension, 1.0).is_delta
               for p in result.spec.presets) else {},
        "rows": [asdict(r) for r in result.rows],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
