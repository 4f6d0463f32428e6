"""Command-line interface.

Subcommands: gap, schedule, matrix-elements, p1, sweep, fit.  One JSON
config document drives p1 and sweep runs; command-line flags override
config fields.  Exit codes: 0 success, 1 config or usage error, 2
numerical failure.  The environment variable ADVS_BUDGET caps the total
number of integrand evaluations for the process.

All floating-point output is printed with 17 significant digits so values
round-trip losslessly, and repeated runs emit byte-identical files (the
optional JSON summary timestamp lives only in its header).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import sweep as sweep_mod
from .errors import NumericalError
from .failure import (p1_asymptotic, p1_frequency_domain, p1_markovian,
                      p1_time_domain)
from .grover import GroverInstance, gap, matrix_element
from .integrators import set_budget
from .schedules import (build_schedule, canonical_kind, schedule_to_json)
from .spectral import CouplingConfig, correlation_kernel, total_channel_weight
from .sweep import (SweepSpec, fit_exponent, result_to_json, rows_to_csv,
                    rows_to_dat, run_sweep, threshold_report)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


class _Parser(argparse.ArgumentParser):
    """argparse that exits with the config-error code instead of 2."""

    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    """Validated mirror of the JSON config document."""

    n: int = 6
    n_values: list | None = None
    schedule: str = "gap-squared"
    schedule_kinds: list | None = None
    T: float | None = None
    c: float | None = None
    epsilon: float | None = 0.1
    preset: str = "photon_thermal(3)"
    presets: list | None = None
    dimension: int | None = None
    lam: float = 0.01
    topology: str = "independent"
    channels: list | None = None
    method: str = "all"
    methods: list | None = None
    delta_strength: float = 1.0
    rel_tol: float = 1e-6
    jobs: int = 1
    out: str | None = None
    format: str = "csv"
    seed: int = 0
    timing: bool = False

    @classmethod
    def load(cls, path: str | None, overrides: dict) -> "RunConfig":
        data = {}
        if path:
            with open(path) as fh:
                data = json.load(fh)
            if not isinstance(data, dict):
                raise ValueError("config must be a JSON object")
            known = {f.name for f in fields(cls)}
            unknown = set(data) - known
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls(**data)
        if cfg.seed != 0:
            raise ValueError("the seed field is reserved and must be 0 "
                             "(the pipeline is deterministic)")
        if cfg.format not in ("csv", "json", "dat"):
            raise ValueError(f"unknown format {cfg.format!r}")
        return cfg


def _print_gap_rows(n: int, svals) -> None:
    inst = GroverInstance.balanced(n)
    print("s,gap")
    for s in svals:
        print(f"{_fmt(s)},{_fmt(gap(inst, float(s)))}")


def cmd_gap(args) -> int:
    if args.s is None and args.grid is None:
        args.grid = 11
    if args.s is not None:
        _print_gap_rows(args.n, [args.s])
    else:
        _print_gap_rows(args.n, np.linspace(0.0, 1.0, args.grid))
    return EXIT_OK


def cmd_schedule(args) -> int:
    inst = GroverInstance.balanced(args.n)
    kw = {}
    if args.T is not None:
        kw["T"] = args.T
    if args.epsilon is not None:
        kw["epsilon"] = args.epsilon
    if args.c is not None:
        kw["c"] = args.c
    if not kw:
        kw["epsilon"] = 0.1
    sched = build_schedule(args.kind, inst, **kw)
    text = schedule_to_json(sched)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_matrix_elements(args) -> int:
    inst = GroverInstance.balanced(args.n)
    kw = {"T": args.T} if args.T is not None else {"epsilon": args.epsilon or 0.1}
    sched = build_schedule(args.kind, inst, **kw)
    times = np.linspace(0.0, sched.T, args.grid)
    print("t,s,re,im,abs")
    for t in times:
        el = matrix_element(inst, args.qubit, args.channel, float(t), sched)
        v = el.value
        print(",".join(_fmt(x) for x in
                       (t, sched.s_of_t(float(t)), v.real, v.imag, abs(v))))
    return EXIT_OK


def _one_estimate(method, inst, sched, coupling, model):
    if method == "markov":
        if not model.is_delta:
            raise ValueError("method 'markov' needs the markovian preset")
        return p1_markovian(inst, sched, coupling, model.strength, model=model)
    if method == "freq":
        return p1_frequency_domain(inst, sched, coupling, model)
    if method == "time":
        kern = correlation_kernel(model, tau_max=sched.T * 1.01)
        return p1_time_domain(inst, sched, coupling, kern, model=model)
    if method == "asymptotic":
        return p1_asymptotic(inst, sched, coupling, model)
    raise ValueError(f"unknown method {method!r}")


def cmd_p1(args) -> int:
    cfg = RunConfig.load(args.config, {"method": args.method, "n": args.n})
    inst = GroverInstance.balanced(cfg.n)
    kw = ({"T": cfg.T} if cfg.T is not None else
          {"c": cfg.c} if cfg.c is not None else
          {"epsilon": cfg.epsilon})
    sched = build_schedule(cfg.schedule, inst, **kw)
    coupling = CouplingConfig(lam=cfg.lam, instance=inst, topology=cfg.topology,
                              channels=tuple(cfg.channels or ("xx",)))
    model = sweep_mod._preset_model(cfg.preset, cfg.dimension, cfg.delta_strength)

    methods = (["markov", "freq", "asymptotic", "time"] if cfg.method == "all"
               else [cfg.method])
    if model.is_delta and cfg.method == "all":
        methods = ["markov", "time"]
    records = []
    for m in methods:
        est = _one_estimate(m, inst, sched, coupling, model)
        records.append({
            "n": cfg.n, "N": inst.N, "schedule": sched.kind,
            "model": model.to_dict(), "method": est.method,
            "value": est.value, "error": est.numerical_error,
            "breakdown": est.breakdown, "flags": list(est.flags),
        })
    out = {"records": records}
    if len(records) > 1:
        base = records[0]["value"]
        out["cross_method_relative_deviation"] = {
            r["method"]: (abs(r["value"] - base) / abs(base) if base else 0.0)
            for r in records[1:]
        }
    print(json.dumps(out, indent=2, sort_keys=True, default=_fmt))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = RunConfig.load(args.config, {
        "jobs": args.jobs, "out": args.out, "format": args.format,
        "timing": True if args.timing else None,
    })
    spec = SweepSpec(
        n_values=tuple(cfg.n_values or [cfg.n]),
        schedule_kinds=tuple(cfg.schedule_kinds or [cfg.schedule]),
        presets=tuple(cfg.presets or [cfg.preset]),
        preset_dimension=cfg.dimension,
        lam=cfg.lam,
        epsilon=cfg.epsilon if cfg.epsilon is not None else 0.1,
        methods=tuple(cfg.methods or ["markovian"]),
        topology=cfg.topology,
        channels=tuple(cfg.channels or ("xx",)),
        delta_strength=cfg.delta_strength,
        rel_tol=cfg.rel_tol,
    )
    result = run_sweep(spec, jobs=cfg.jobs, timing=cfg.timing)
    hard_failures = [r for r in result.rows if r.failure]
    csv_text = rows_to_csv(result.rows)
    json_text = result_to_json(result)
    dat_text = rows_to_dat(result.rows)
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "sweep.csv"), "w") as fh:
            fh.write(csv_text)
        with open(os.path.join(cfg.out, "sweep.json"), "w") as fh:
            fh.write(json_text + "\n")
        if cfg.format == "dat":
            with open(os.path.join(cfg.out, "sweep.dat"), "w") as fh:
                fh.write(dat_text)
        print(f"wrote {len(result.rows)} rows to {cfg.out}")
    else:
        print({"csv": csv_text, "json": json_text, "dat": dat_text}[cfg.format])
    if hard_failures and len(hard_failures) == len(result.rows):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_fit(args) -> int:
    import csv as _csv
    with open(args.csv) as fh:
        rows = list(_csv.DictReader(fh))
    if not rows:
        raise ValueError("empty CSV")
    col = args.column
    if args.method:
        rows = [r for r in rows if r.get("method") == args.method]
    xs, ys = [], []
    for r in rows:
        x = float(r["N"]) if "N" in r else 2.0 ** float(r["n"])
        y = float(r[col])
        if np.isfinite(y) and y > 0:
            xs.append(x)
            ys.append(y)
    fit = fit_exponent(xs, ys)
    print(json.dumps({"column": col, "exponent": fit.exponent,
                      "stderr": fit.stderr, "r_squared": fit.r_squared,
                      "points": fit.points}, indent=2, sort_keys=True,
                     default=_fmt))
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="advs", description="adiabatic search in a bosonic "
                "environment: gaps, schedules, failure probabilities, sweeps")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gap", parents=[], help="print gap values")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--s", type=float)
    g.add_argument("--grid", type=int)
    g.set_defaults(func=cmd_gap)

    s = sub.add_parser("schedule", help="build a schedule and print its JSON")
    s.add_argument("--kind", default="uniform")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--T", type=float)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--c", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_schedule)

    m = sub.add_parser("matrix-elements", help="tabulate transition amplitudes")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--channel", choices=("x", "y", "z"), default="x")
    m.add_argument("--qubit", type=int, default=0)
    m.add_argument("--kind", default="uniform")
    m.add_argument("--T", type=float)
    m.add_argument("--epsilon", type=float)
    m.add_argument("--grid", type=int, default=11)
    m.set_defaults(func=cmd_matrix_elements)

    q = sub.add_parser("p1", help="failure probability by one or all methods")
    q.add_argument("--config")
    q.add_argument("--method", choices=("time", "freq", "markov", "asymptotic", "all"))
    q.add_argument("--n", type=int)
    q.set_defaults(func=cmd_p1)

    w = sub.add_parser("sweep", help="run a sweep from a config file")
    w.add_argument("--config")
    w.add_argument("--jobs", type=int)
    w.add_argument("--out")
    w.add_argument("--format", choices=("csv", "json", "dat"))
    w.add_argument("--timing", action="store_true")
    w.set_defaults(func=cmd_sweep)

    f = sub.add_parser("fit", help="fit a scaling exponent from a sweep CSV")
    f.add_argument("--csv", required=True)
    f.add_argument("--column", default="p1")
    f.add_argument("--method")
    f.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    budget = os.environ.get("ADVS_BUDGET")
    if budget:
        try:
            set_budget(int(budget))
        except ValueError:
            print(f"advs: invalid ADVS_BUDGET={budget!r}", file=sys.stderr)
            return EXIT_CONFIG
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"advs: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"advs: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
