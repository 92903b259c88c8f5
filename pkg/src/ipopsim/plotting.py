"""Deterministic SVG plots of traces with min/max envelope decimation."""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .engine import Trace  # noqa: E402

MAX_POINTS = 20_000


@dataclass(frozen=True)
class PlotSpec:
    title: str = ""
    ylabel: str = ""
    xlabel: str = "time [s]"
    max_points: int = MAX_POINTS
    width_in: float = 8.0
    height_in: float = 4.0


def envelope_decimate(t: np.ndarray, x: np.ndarray, max_points: int = MAX_POINTS):
    """Keep each bin's min and max (in time order) so extremes survive."""
    n = x.size
    if n <= max_points:
        return t, x
    nbins = max(1, max_points // 2)
    edges = np.linspace(0, n, nbins + 1).astype(int)
    idx = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        seg = x[a:b]
        i_min = a + int(np.argmin(seg))
        i_max = a + int(np.argmax(seg))
        idx.extend(sorted({i_min, i_max}))
    idx = np.asarray(idx)
    return t[idx], x[idx]


def emit_plot(traces: Sequence[Trace], spec: PlotSpec, path: str | Path | None = None) -> bytes:
    """Render traces to SVG; returns the bytes and writes them when ``path`` is given."""
    with plt.rc_context({"svg.hashsalt": "ipopsim", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(spec.width_in, spec.height_in))
        for tr in traces:
            t, x = envelope_decimate(tr.t, tr.samples, spec.max_points)
            ax.plot(t, x, linewidth=0.8, label=tr.name)
        ax.set_xlabel(spec.xlabel)
        ax.set_ylabel(spec.ylabel)
        if spec.title:
            ax.set_title(spec.title)
        if traces:
            ax.legend(loc="best", fontsize="small")
        ax.grid(True, linewidth=0.3)
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    data = buf.getvalue()
    if path is not None:
        Path(path).write_bytes(data)
    return data
