"""Command-line front end: run, compare, sweep and list catalog scenarios.

Exit codes: 0 success, 2 scenario validation error, 3 simulation abort,
4 an ``--assert`` threshold was not met.
"""
from __future__ import annotations

import argparse
import logging
import operator
import re
import shutil
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .engine import SimulationAbort, run_simulation
from .report import (RunReport, build_report, controlled_trace, metrics_csv, resample,
                     traces_csv, write_run)
from .scenario import (Scenario, ScenarioError, catalog_names, parse_scenario,
                       resolve_path, with_override)

log = logging.getLogger("ipopsim")

EXIT_OK, EXIT_INVALID, EXIT_ABORT, EXIT_ASSERT = 0, 2, 3, 4

_OPS = {"<=": operator.le, ">=": operator.ge, "<": operator.lt, ">": operator.gt, "==": operator.eq}
_ASSERT_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(<=|>=|==|<|>)\s*([-+0-9.eEinf]+)\s*$")


def parse_assertion(text: str):
    m = _ASSERT_RE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"bad assertion {text!r}; expected e.g. ripple_pp<=170")
    return m.group(1), m.group(2), float(m.group(3))


def check_assertions(rows: list[dict], assertions) -> list[str]:
    failed = []
    for row in rows:
        for key, op, bound in assertions:
            if key not in row:
                failed.append(f"{row.get('scenario', '?')}: unknown metric {key}")
            elif not _OPS[op](float(row[key]), bound):
                failed.append(f"{row.get('scenario', '?')}: {key}={row[key]:.6g} fails {op} {bound:g}")
    return failed


def _simulate(sc: Scenario):
    t0 = time.perf_counter()
    res = run_simulation(sc)
    return res, build_report(sc, res, time.perf_counter() - t0)


def _metrics_only(sc: Scenario) -> RunReport:
    return _simulate(sc)[1]


def _finish(tmp: Path, out: Path):
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.exists():
        shutil.rmtree(out)
    shutil.move(str(tmp), str(out))


def _staging(out: Path) -> Path:
    out.parent.mkdir(parents=True, exist_ok=True)
    return Path(tempfile.mkdtemp(prefix=f".{out.name}-", dir=out.parent))


def cmd_run(args) -> int:
    sc = parse_scenario(args.scenario)
    out = Path(args.out or Path("out") / sc.name)
    tmp = _staging(out)
    try:
        res, rep = _simulate(sc)
        write_run(tmp, sc, res, rep, args.full_rate)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    _finish(tmp, out)
    m = rep.metrics
    print(f"{sc.name}: settling={m.settling_time:.4g} s ripple_pp={m.ripple_pp:.4g} "
          f"tone={m.tone_amp:.4g} -> {out}")
    return _assert_exit([rep.row()], args.assertions)


def _run_many(scenarios: list[Scenario], workers: int, full: bool):
    """Run scenarios in order; with workers > 1 fan out to processes."""
    fn = _simulate if full else _metrics_only
    if workers <= 1 or len(scenarios) == 1:
        return [fn(s) for s in scenarios]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, scenarios))


def cmd_compare(args) -> int:
    scs = [parse_scenario(p) for p in args.scenarios]
    out = Path(args.out or Path("out") / ("compare-" + "-".join(s.name for s in scs)))
    results = _run_many(scs, args.workers, full=True)
    tmp = _staging(out)
    try:
        rows = [rep.row() for _, rep in results]
        (tmp / "comparison.csv").write_text(metrics_csv(rows))
        overlay = []
        for sc, (res, _) in zip(scs, results):
            tr = res[controlled_trace(sc)]
            if not args.full_rate:
                tr = resample(tr, sc.outputs.rate)
            overlay.append(type(tr)(f"{sc.name}.{tr.name}", tr.t0, tr.dt, tr.samples))
        (tmp / "overlay.csv").write_text(traces_csv(overlay))
        if all(s.outputs.plots for s in scs):
            from .plotting import PlotSpec, emit_plot
            emit_plot(overlay, PlotSpec("comparison", "controlled output"), tmp / "overlay.svg")
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    _finish(tmp, out)
    for r in rows:
        print(f"{r['scenario']:>24s}  settling={r['settling_time']:.4g}  ripple_pp={r['ripple_pp']:.4g}  "
              f"tone={r['tone_amp']:.4g}")
    return _assert_exit(rows, args.assertions)


def parse_values(text: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ScenarioError("--values", "must list at least one value")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ScenarioError("--values", f"must be comma-separated numbers, got {text!r}") from None


def cmd_sweep(args) -> int:
    base = parse_scenario(args.scenario)
    if args.param is None:
        if base.sweep is None:
            raise ScenarioError("--param", "required (the scenario declares no sweep)")
        param, values = base.sweep
    else:
        param = args.param
        if args.values is None:
            raise ScenarioError("--values", "required with --param")
        values = parse_values(args.values)
    scs = [with_override(base, param, v) for v in values]
    results = _run_many(scs, args.workers, full=False)
    rows = []
    for v, rep in zip(values, results):
        row = {"value": v}
        row.update(rep.row())
        rows.append(row)
    out = Path(args.out or Path("out") / f"sweep-{base.name}")
    tmp = _staging(out)
    try:
        (tmp / "sweep.csv").write_text(f"# param = {param}\n" + metrics_csv(rows))
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    _finish(tmp, out)
    for r in rows:
        print(f"{param}={r['value']:<10g} ripple_pp={r['ripple_pp']:.4g}  settling={r['settling_time']:.4g}")
    return _assert_exit(rows, args.assertions)


def cmd_catalog(args) -> int:
    for name in catalog_names():
        sc = parse_scenario(resolve_path(name))
        desc = (sc.raw.get("description") or "").strip()
        print(f"{name:24s} {desc}")
    return EXIT_OK


def _assert_exit(rows, assertions) -> int:
    failed = check_assertions(rows, assertions or [])
    for f in failed:
        print(f"ASSERT FAILED {f}", file=sys.stderr)
    return EXIT_ASSERT if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ipopsim", description=__doc__.splitlines()[0])
    ap.add_argument("--workers", type=int, default=1, help="parallel runs for compare/sweep")
    ap.add_argument("--full-rate", action="store_true", help="write traces at the control rate")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory (default out/<name>)")
        p.add_argument("--assert", dest="assertions", action="append", type=parse_assertion,
                       metavar="METRIC<=VALUE", help="fail with exit code 4 unless the metric holds")

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("scenario", help="scenario file or catalog name")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several scenarios and tabulate their metrics")
    p.add_argument("scenarios", nargs="+")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="re-run a scenario over values of one numeric parameter")
    p.add_argument("scenario")
    p.add_argument("--param", help="dotted parameter path, e.g. plant.C2")
    p.add_argument("--values", help="comma-separated values")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("catalog", help="shipped scenarios")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_catalog)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SimulationAbort as exc:
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
