"""Metric extraction for a finished run, CSV writers and the run report."""
from __future__ import annotations

import csv
import fnmatch
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis.metrics import Metrics, ripple_pp, sag_metrics, settling_time, tone_amplitude
from .engine import SimResult, Trace
from .scenario import Scenario

FMT = "%.9g"


def controlled_trace(sc: Scenario) -> str:
    return "u_o" if sc.controller.mode == "voltage" else "i_o_total"


def compute_metrics(sc: Scenario, res: SimResult) -> Metrics:
    tr = res[controlled_trace(sc)]
    target = sc.references.value
    events = sorted(t for t, _ in sc.load.events)
    first_event = events[0] if events else None
    head = tr.window(0.0, first_event - 1e-12) if first_event else tr
    settle = settling_time(head, target, sc.outputs.settle_band) if target else 0.0
    window = sc.outputs.ripple_window
    rip = ripple_pp(tr, window)
    tone = tone_amplitude(tr, sc.tone_freq, window)
    depth = duration = 0.0
    if first_event is not None:
        depth, duration = sag_metrics(tr, first_event, target, sc.outputs.sag_band)
    return Metrics(settle, rip, depth, duration, tone, sc.tone_freq)


def select_traces(res: SimResult, patterns: Sequence[str]) -> list[Trace]:
    """Expand patterns in declared order; each name appears once."""
    out: list[Trace] = []
    seen = set()
    names = list(res.traces)
    for pat in patterns:
        hits = [n for n in names if fnmatch.fnmatchcase(n, pat)]
        if not hits:
            raise KeyError(f"trace pattern {pat!r} matches nothing")
        for n in hits:
            if n not in seen:
                seen.add(n)
                out.append(res.traces[n])
    return out


def resample(tr: Trace, rate: float) -> Trace:
    """Zero-order-hold resampling onto a uniform grid at ``rate``."""
    dt = 1.0 / rate
    if dt <= tr.dt * (1 + 1e-12):
        return tr
    t_end = tr.t0 + (len(tr) - 1) * tr.dt
    n = int(math.floor((t_end - tr.t0) / dt + 1e-9)) + 1
    idx = np.floor(np.arange(n) * dt / tr.dt + 1e-9).astype(int)
    return Trace(tr.name, tr.t0, dt, tr.samples[np.minimum(idx, len(tr) - 1)])


def traces_csv(traces: Sequence[Trace]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time"] + [t.name for t in traces])
    if traces:
        n = max(len(t) for t in traces)
        ref = max(traces, key=len)
        cols = [t.samples for t in traces]
        for i in range(n):
            row = [FMT % (ref.t0 + i * ref.dt)]
            row += [FMT % c[i] if i < c.size else "" for c in cols]
            w.writerow(row)
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return FMT % v
    return str(v)


def metrics_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    keys = list(rows[0])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow([_fmt(r.get(k, "")) for k in keys])
    return buf.getvalue()


@dataclass
class RunReport:
    scenario: str
    digest: str
    metrics: Metrics
    deviations: tuple[str, ...]
    metadata: dict = field(default_factory=dict)
    wall_time: float = 0.0   # kept out of the written text so reports regenerate identically

    def row(self) -> dict:
        d = {"scenario": self.scenario, "digest": self.digest}
        d.update(self.metrics.as_dict())
        return d

    def text(self) -> str:
        lines = [f"run report: {self.scenario}", f"scenario digest: {self.digest}", ""]
        m = self.metrics
        lines.append("Results")
        lines.append(f"  settling time      {_fmt(m.settling_time)} s")
        lines.append(f"  ripple (pk-pk)     {_fmt(m.ripple_pp)}")
        lines.append(f"  tone at {m.tone_freq:g} Hz    {_fmt(m.tone_amp)}")
        if m.sag_depth or m.sag_duration:
            lines.append(f"  sag depth          {_fmt(m.sag_depth)}")
            lines.append(f"  sag duration       {_fmt(m.sag_duration)} s")
        lines.append("")
        lines.append("Defaults applied (not stated in the scenario)")
        for d in self.deviations:
            lines.append(f"  - {d}")
        if not self.deviations:
            lines.append("  (none)")
        lines.append("")
        lines.append("[metrics]")
        for k, v in m.as_dict().items():
            lines.append(f"{k} = {_fmt(v)}")
        lines.append("")
        lines.append("[metadata]")
        for k in sorted(self.metadata):
            lines.append(f"{k} = {_fmt(self.metadata[k])}")
        lines.append("")
        lines.append("[deviations]")
        for i, d in enumerate(self.deviations):
            lines.append(f"{i} = {d}")
        return "\n".join(lines) + "\n"


def build_report(sc: Scenario, res: SimResult, wall_time: float = 0.0) -> RunReport:
    meta = {
        "controller": sc.controller.kind,
        "mode": sc.controller.mode,
        "modules": sc.n_modules,
        "dt_plant": res.meta["dt_plant"],
        "dt_ctrl": res.meta["dt_ctrl"],
        "R_s": sc.plant.R_s,
        "R_d": sc.plant.R_d,
        "n": sc.plant.n,
        "hdcsc": sc.hdcsc.enabled,
        "compensation": sc.compensation.enabled,
        "mismatch": sc.topology.mismatch,
        "settle_band": sc.outputs.settle_band,
        "delay_steps": " ".join(str(s) for s in res.meta["delay_steps"]),
        "delay_max_quantization_s": res.meta["delay_max_quantization"],
    }
    if sc.controller.kind != "pi":
        meta["b0"] = sc.nominal_b0()
        meta["wc0"] = sc.controller.wc0
        meta["w0"] = sc.controller.w0
    if sc.controller.kind == "aladrc":
        meta["k_s"] = sc.controller.k_s
        meta["i_c"] = sc.controller.i_c
        meta["hysteresis"] = sc.controller.hysteresis
    return RunReport(sc.name, sc.digest(), compute_metrics(sc, res), sc.defaults_applied, meta, wall_time)


def write_run(out: Path, sc: Scenario, res: SimResult, report: RunReport, full_rate: bool,
              plots: bool = True) -> list[Path]:
    from .plotting import PlotSpec, emit_plot

    out.mkdir(parents=True, exist_ok=True)
    chosen = select_traces(res, sc.outputs.traces)
    if not full_rate:
        chosen = [resample(t, sc.outputs.rate) for t in chosen]
    files = []
    p = out / "traces.csv"
    p.write_text(traces_csv(chosen))
    files.append(p)
    p = out / "metrics.csv"
    p.write_text(metrics_csv([report.row()]))
    files.append(p)
    p = out / "report.txt"
    p.write_text(report.text())
    files.append(p)
    if plots and sc.outputs.plots:
        name = controlled_trace(sc)
        unit = "V" if name == "u_o" else "A"
        p = out / f"{name}.svg"
        emit_plot([res[name]], PlotSpec(sc.name, f"{name} [{unit}]"), p)
        files.append(p)
        p = out / "u_i.svg"
        emit_plot([res["m01.u_i"]], PlotSpec(sc.name, "module 1 u_i [V]"), p)
        files.append(p)
    return files
