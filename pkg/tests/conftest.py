"""Shared fixtures: cached catalog runs and the per-criterion summary."""
from __future__ import annotations

import time
from collections import OrderedDict

import pytest

from ipopsim import parse_scenario, run_simulation, with_override
from ipopsim.report import compute_metrics

_RUNS: dict = {}
_CRITERIA: "OrderedDict[str, dict]" = OrderedDict()


class Run:
    def __init__(self, sc, res, wall):
        self.sc = sc
        self.res = res
        self.wall = wall
        self.metrics = compute_metrics(sc, res)


def simulate(name: str, **overrides) -> Run:
    """Run a catalog scenario once per session (keyed by overrides)."""
    key = (name, tuple(sorted(overrides.items())))
    if key not in _RUNS:
        sc = parse_scenario(name)
        for path, value in sorted(overrides.items()):
            sc = with_override(sc, path.replace("__", "."), value, sweep=False)
        t0 = time.perf_counter()
        res = run_simulation(sc)
        _RUNS[key] = Run(sc, res, time.perf_counter() - t0)
    return _RUNS[key]


@pytest.fixture(scope="session")
def sim():
    return simulate


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion id")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marks = getattr(report, "_criterion", None)
    if marks is None:
        return
    num, title = marks
    entry = _CRITERIA.setdefault(num, {"title": title, "tests": []})
    entry["tests"].append((report.nodeid.split("::")[-1], report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = (str(m.args[0]), m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")

    def key(k):
        return (int("".join(ch for ch in k if ch.isdigit()) or 0), k)

    for num in sorted(_CRITERIA, key=key):
        e = _CRITERIA[num]
        ok = all(o == "passed" for _, o in e["tests"])
        tr.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {e['title']}")
        for name, o in e["tests"]:
            tr.write_line(f"      {o.upper():7s} {name}")
