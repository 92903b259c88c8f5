"""Scenario files: YAML sections mirroring the modules, strictly validated.

Every key is checked against a schema; errors name the dotted key and the
source line.  Numbers may be written in any form ``float()`` accepts, so
``3500e-6`` works even though YAML 1.1 would read it as a string.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .control import D_MAX, LadrcParams
from .hdcsc import Topology
from .plant import GridParams, PlantParams

CATALOG_DIR = Path(__file__).with_name("catalog")

# Frozen baseline PI gains (per-module duty per ampere of share current, and per A*s).
PI_CURRENT_GAINS = (0.01, 0.09)
# Voltage-mode PI gains (duty per volt, per V*s).
PI_VOLTAGE_GAINS = (1e-4, 0.007)
U_I0 = 513.0


class ScenarioError(ValueError):
    def __init__(self, key: str, message: str, line: int | None = None, source: str | None = None):
        self.key = key
        self.line = line
        self.source = source
        where = f" (line {line})" if line else ""
        src = f"{source}: " if source else ""
        super().__init__(f"{src}{key} {message}{where}")


# ---------------------------------------------------------------------------
# resolved configuration

@dataclass(frozen=True)
class TopologyCfg:
    x: int = 3
    y: int = 4
    active: tuple[bool, ...] = ()
    mismatch: float = 0.01
    events: tuple[tuple[float, int, bool], ...] = ()

    @property
    def topology(self) -> Topology:
        return Topology(self.x, self.y)


@dataclass(frozen=True)
class ControllerCfg:
    kind: str
    mode: str = "current"
    wc0: float = 400.0
    w0: float = 2800.0
    b0: float | None = None
    k_s: float = 100.0
    i_c: float = 30.0
    hysteresis: float = 2.0
    kp_pi: float = PI_CURRENT_GAINS[0]
    ki_pi: float = PI_CURRENT_GAINS[1]
    d_max: float = D_MAX
    observer_substeps: int = 4


@dataclass(frozen=True)
class CompensationCfg:
    enabled: bool = False
    k_w: float = 0.01
    limit: float = 0.05


@dataclass(frozen=True)
class HdcscCfg:
    enabled: bool = False
    apply_to: str = "compensation"


@dataclass(frozen=True)
class ReferencesCfg:
    value: float
    steps: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class LoadCfg:
    R: float = 0.01
    events: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class ClockCfg:
    t_end: float
    dt_plant: float = 2e-6


@dataclass(frozen=True)
class OutputsCfg:
    traces: tuple[str, ...] = ("i_o_total", "u_o", "m*.i_o", "m*.D", "m*.u_i", "m*.u_rect")
    rate: float = 10e3
    ripple_window: float = 0.1
    settle_band: float = 0.02
    sag_band: float = 0.02
    tone_freq: float | None = None
    plots: bool = True


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: GridParams
    plant: PlantParams
    plant_ideal_link: bool
    topology: TopologyCfg
    controller: ControllerCfg
    compensation: CompensationCfg
    hdcsc: HdcscCfg
    references: ReferencesCfg
    load: LoadCfg
    clock: ClockCfg
    seed: int
    outputs: OutputsCfg
    initial_u_o: float = 0.0
    sweep: tuple[str, tuple[float, ...]] | None = None
    initial_u_C1: float | None = None
    defaults_applied: tuple[str, ...] = ()
    source: str = ""
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_modules(self) -> int:
        return self.topology.x * self.topology.y

    @property
    def tone_freq(self) -> float:
        return self.outputs.tone_freq or self.grid.m * self.grid.f_grid

    def ladrc_params(self) -> LadrcParams:
        c = self.controller
        return LadrcParams(c.wc0, c.w0, self.nominal_b0(), c.k_s, c.i_c, c.hysteresis)

    def nominal_b0(self) -> float:
        if self.controller.b0 is not None:
            return self.controller.b0
        return self.plant.n * U_I0 / (self.plant.L2 * self.plant.C2)

    def resolved_b0(self, C2: np.ndarray) -> np.ndarray:
        """Per-module b0; the automatic value follows each module's L2*C2 share."""
        if self.controller.b0 is not None:
            return np.full(C2.shape, float(self.controller.b0))
        return np.full(C2.shape, self.nominal_b0())

    def digest(self) -> str:
        blob = json.dumps(_canonical(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def resolved(self) -> dict:
        return _canonical(self)


def _canonical(sc: Scenario) -> dict:
    d = asdict(sc)
    for k in ("raw", "source", "defaults_applied"):   # provenance, not parameters
        d.pop(k, None)
    return json.loads(json.dumps(d, default=str))


# ---------------------------------------------------------------------------
# schema

_NUM, _INT, _BOOL, _STR = "num", "int", "bool", "str"

SCHEMA: dict[str, dict[str, Any]] = {
    "grid": {"u_ll_rms": _NUM, "f_grid": _NUM, "m": _INT},
    "plant": {"n": _NUM, "L_lk": _NUM, "L1": _NUM, "C1": _NUM, "L2": _NUM, "C2": _NUM,
              "R_d": _NUM, "R_s": _NUM, "f_s": _NUM, "duty_loss": _BOOL, "dc_link": _STR},
    "topology": {"x": _INT, "y": _INT, "active": "list", "mismatch": _NUM, "events": "list"},
    "controller": {"kind": _STR, "mode": _STR, "wc0": _NUM, "w0": _NUM, "b0": _NUM,
                   "k_s": _NUM, "i_c": _NUM, "hysteresis": _NUM, "kp_pi": _NUM,
                   "ki_pi": _NUM, "d_max": _NUM, "observer_substeps": _INT},
    "compensation": {"enabled": _BOOL, "k_w": _NUM, "limit": _NUM},
    "hdcsc": {"enabled": _BOOL, "apply_to": _STR},
    "references": {"i_ref": _NUM, "u_ref": _NUM, "steps": "list"},
    "load": {"R": _NUM, "events": "list"},
    "clock": {"t_end": _NUM, "dt_plant": _NUM},
    "initial": {"u_o": _NUM, "u_C1": _NUM},
    "outputs": {"traces": "list", "rate": _NUM, "ripple_window": _NUM, "settle_band": _NUM,
                "sag_band": _NUM, "tone_freq": _NUM, "plots": _BOOL},
    "sweep": {"param": _STR, "values": "list"},
}
TOP_LEVEL = {"name": _STR, "seed": _INT, "description": _STR, **{k: "section" for k in SCHEMA}}

# Minimum keys a scenario must state itself.
REQUIRED = ("controller.kind", "clock.t_end")

SWEEPABLE = {f"{sec}.{k}" for sec, keys in SCHEMA.items() for k, kind in keys.items()
             if kind in (_NUM, _INT)} | {"seed"}
SWEEPABLE -= {"grid.m", "topology.x", "topology.y", "controller.observer_substeps"}
_ALIASES = {"control.": "controller.", "ωc0": "wc0", "ω0": "w0", "ωc": "wc0"}


def canonical_path(path: str) -> str:
    for a, b in _ALIASES.items():
        path = path.replace(a, b)
    return path


# ---------------------------------------------------------------------------
# parsing

def _line_map(node, prefix: str, out: dict[str, int]):
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[key] = k.start_mark.line + 1
            _line_map(v, key, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            key = f"{prefix}[{i}]"
            out[key] = v.start_mark.line + 1
            _line_map(v, key, out)


def load_raw(path: str | Path) -> tuple[dict, dict[str, int]]:
    text = Path(path).read_text()
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError("<file>", f"is not valid YAML: {exc}", mark.line + 1 if mark else None,
                            str(path)) from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError("<file>", "top level must be a mapping", 1, str(path))
    lines: dict[str, int] = {}
    if node is not None:
        _line_map(node, "", lines)
    return data, lines


def resolve_path(path: str | Path) -> Path:
    """Accept a file path or the name of a catalog scenario."""
    p = Path(path)
    if p.exists():
        return p
    cand = CATALOG_DIR / f"{path}.yaml"
    if cand.exists():
        return cand
    raise ScenarioError("<file>", f"names no scenario file or catalog entry ({path})")


def parse_scenario(path: str | Path) -> Scenario:
    p = resolve_path(path)
    data, lines = load_raw(p)
    return scenario_from_mapping(data, lines, str(p))


class _Ctx:
    def __init__(self, data: dict, lines: dict[str, int], source: str):
        self.data = data
        self.lines = lines
        self.source = source
        self.applied: list[str] = []

    def err(self, key: str, msg: str) -> ScenarioError:
        line = self.lines.get(key)
        if line is None and "." in key:
            line = self.lines.get(key.rsplit(".", 1)[0])
        return ScenarioError(key, msg, line, self.source)

    def section(self, name: str) -> dict:
        sec = self.data.get(name)
        if sec is None:
            return {}
        if not isinstance(sec, dict):
            raise self.err(name, "must be a mapping")
        return sec

    def has(self, key: str) -> bool:
        sec, k = key.split(".", 1)
        return k in self.section(sec) and self.section(sec)[k] is not None

    def get(self, key: str, default=None, kind: str = _NUM):
        sec, k = key.split(".", 1)
        s = self.section(sec)
        if k not in s or s[k] is None:
            return default
        return self.coerce(key, s[k], kind)

    def coerce(self, key: str, v, kind: str):
        if kind == _NUM:
            if isinstance(v, bool):
                raise self.err(key, f"should be a number, got {v!r}")
            try:
                out = float(v)
            except (TypeError, ValueError):
                raise self.err(key, f"should be a number, got {v!r}") from None
            if not math.isfinite(out):
                raise self.err(key, "must be finite")
            return out
        if kind == _INT:
            f = self.coerce(key, v, _NUM)
            if f != int(f):
                raise self.err(key, f"should be an integer, got {v!r}")
            return int(f)
        if kind == _BOOL:
            if not isinstance(v, bool):
                raise self.err(key, f"should be true or false, got {v!r}")
            return v
        if kind == _STR:
            if not isinstance(v, str):
                raise self.err(key, f"should be text, got {v!r}")
            return v
        return v


def _check_keys(ctx: _Ctx):
    for k in ctx.data:
        if k not in TOP_LEVEL:
            raise ctx.err(str(k), "is not a known key")
    for sec, keys in SCHEMA.items():
        for k in ctx.section(sec):
            if k not in keys:
                raise ctx.err(f"{sec}.{k}", "is not a known key")


def _positive(ctx: _Ctx, key: str, v: float, allow_zero: bool = False):
    if v < 0 or (v == 0 and not allow_zero):
        raise ctx.err(key, f"must be {'non-negative' if allow_zero else 'positive'}, got {v:g}")


def scenario_from_mapping(data: dict, lines: dict[str, int] | None = None,
                          source: str = "<mapping>") -> Scenario:
    ctx = _Ctx(data, lines or {}, source)
    _check_keys(ctx)
    for key in REQUIRED:
        if not ctx.has(key):
            raise ctx.err(key, "required")

    name = ctx.coerce("name", data.get("name", Path(source).stem), _STR)
    seed = ctx.coerce("seed", data.get("seed", 1), _INT)

    # grid
    try:
        grid = GridParams(ctx.get("grid.u_ll_rms", 380.0), ctx.get("grid.f_grid", 50.0),
                          ctx.get("grid.m", 6, _INT))
    except ValueError as exc:
        raise ctx.err("grid", str(exc)) from None

    # plant
    pv = {}
    for k in ("n", "L_lk", "L1", "C1", "L2", "C2", "f_s"):
        v = ctx.get(f"plant.{k}")
        if v is not None:
            _positive(ctx, f"plant.{k}", v)
            pv[k] = v
    for k in ("R_d", "R_s"):
        v = ctx.get(f"plant.{k}")
        if v is not None:
            _positive(ctx, f"plant.{k}", v, allow_zero=True)
            pv[k] = v
    if ctx.has("plant.duty_loss"):
        pv["duty_loss"] = ctx.get("plant.duty_loss", kind=_BOOL)
    link = ctx.get("plant.dc_link", "rectifier", _STR)
    if link not in ("rectifier", "ideal"):
        raise ctx.err("plant.dc_link", "must be 'rectifier' or 'ideal'")
    if "n" not in pv:
        ctx.applied.append("plant.n = 1/1.5 (ratio 1:1.5 read as output/input)")
    if "R_d" not in pv:
        ctx.applied.append("plant.R_d = 0.02 ohm (PSFB formula 4n^2 L_lk f_s = 0.8 ohm cannot carry rated current)")
    if "R_s" not in pv:
        ctx.applied.append("plant.R_s = 0.4 ohm (DC-link damping above the constant-power stability limit)")

    # load
    R = ctx.get("load.R", 0.01)
    _positive(ctx, "load.R", R)
    load_events = []
    for i, ev in enumerate(ctx.section("load").get("events") or []):
        key = f"load.events[{i}]"
        if not isinstance(ev, dict) or set(ev) != {"t", "R"}:
            raise ctx.err(key, "each load event needs exactly keys t and R")
        t_ev = ctx.coerce(f"{key}.t", ev["t"], _NUM)
        r_ev = ctx.coerce(f"{key}.R", ev["R"], _NUM)
        _positive(ctx, f"{key}.R", r_ev)
        load_events.append((t_ev, r_ev))
    plant = PlantParams(**pv, R_load=R)

    # topology
    x = ctx.get("topology.x", 3, _INT)
    y = ctx.get("topology.y", 4, _INT)
    if x < 1 or y < 1:
        raise ctx.err("topology", "x and y must be >= 1")
    N = x * y
    act_raw = ctx.section("topology").get("active")
    if act_raw is None or act_raw == "all":
        active = (True,) * N
    else:
        if not isinstance(act_raw, list) or len(act_raw) != N or not all(isinstance(a, bool) for a in act_raw):
            raise ctx.err("topology.active", f"must be 'all' or a list of {N} booleans")
        active = tuple(act_raw)
    if not any(active):
        raise ctx.err("topology.active", "at least one module must be active")
    mismatch = ctx.get("topology.mismatch")
    if mismatch is None:
        mismatch = 0.01
        ctx.applied.append("topology.mismatch = 1% uniform on L2, C2")
    if not 0 <= mismatch < 0.5:
        raise ctx.err("topology.mismatch", "must lie in [0, 0.5)")
    topo_events = []
    for i, ev in enumerate(ctx.section("topology").get("events") or []):
        key = f"topology.events[{i}]"
        if not isinstance(ev, dict) or not ({"t", "module"} <= set(ev) <= {"t", "module", "active"}):
            raise ctx.err(key, "each topology event needs keys t, module and optional active")
        mod = ctx.coerce(f"{key}.module", ev["module"], _INT)
        if not 1 <= mod <= N:
            raise ctx.err(f"{key}.module", f"module index must be in 1..{N}")
        st = ctx.coerce(f"{key}.active", ev.get("active", False), _BOOL)
        topo_events.append((ctx.coerce(f"{key}.t", ev["t"], _NUM), mod - 1, st))
    topology = TopologyCfg(x, y, active, mismatch, tuple(topo_events))

    # controller
    kind = ctx.get("controller.kind", kind=_STR)
    if kind not in ("pi", "ladrc", "aladrc"):
        raise ctx.err("controller.kind", "must be one of pi, ladrc, aladrc")
    mode = ctx.get("controller.mode", "current", _STR)
    if mode not in ("current", "voltage"):
        raise ctx.err("controller.mode", "must be 'current' or 'voltage'")
    cv: dict[str, Any] = {"kind": kind, "mode": mode}
    for k in ("wc0", "w0", "k_s", "i_c", "hysteresis", "d_max", "b0", "kp_pi", "ki_pi"):
        v = ctx.get(f"controller.{k}")
        if v is not None:
            cv[k] = v
    if ctx.has("controller.observer_substeps"):
        cv["observer_substeps"] = ctx.get("controller.observer_substeps", kind=_INT)
        if cv["observer_substeps"] < 1:
            raise ctx.err("controller.observer_substeps", "must be >= 1")
    default_pi = PI_VOLTAGE_GAINS if mode == "voltage" else PI_CURRENT_GAINS
    if kind == "pi":
        if "kp_pi" not in cv or "ki_pi" not in cv:
            ctx.applied.append(f"controller PI gains ({mode} mode) = frozen defaults "
                               f"kp={cv.get('kp_pi', default_pi[0]):g}, ki={cv.get('ki_pi', default_pi[1]):g}")
        cv.setdefault("kp_pi", default_pi[0])
        cv.setdefault("ki_pi", default_pi[1])
        for k in ("kp_pi", "ki_pi"):
            _positive(ctx, f"controller.{k}", cv[k], allow_zero=True)
    else:
        if "b0" not in cv:
            ctx.applied.append("controller.b0 = n*513 V/(L2*C2) (nominal high-frequency gain)")
        if kind == "aladrc":
            if "k_s" not in cv:
                ctx.applied.append("controller.k_s = 100 rad/s")
            if "hysteresis" not in cv:
                ctx.applied.append("controller.hysteresis = 2 A around i_c")
    if not 0 < cv.get("d_max", D_MAX) <= 1:
        raise ctx.err("controller.d_max", "must lie in (0, 1]")
    controller = ControllerCfg(**cv)
    if kind != "pi":
        for k in ("wc0", "w0"):
            _positive(ctx, f"controller.{k}", getattr(controller, k))
        if controller.w0 < controller.wc0:
            raise ctx.err("controller.w0", f"observer bandwidth {controller.w0:g} below controller "
                                           f"bandwidth {controller.wc0:g}")
        if controller.b0 is not None and controller.b0 == 0:
            raise ctx.err("controller.b0", "must be nonzero")
        if kind == "aladrc" and controller.wc0 - 2 * controller.k_s <= 0:
            raise ctx.err("controller.k_s", "wc0 - 2*k_s must stay positive")
        if controller.k_s < 0 or controller.hysteresis < 0 or controller.i_c < 0:
            raise ctx.err("controller", "k_s, i_c and hysteresis must be non-negative")

    # compensation / hdcsc
    comp = CompensationCfg(ctx.get("compensation.enabled", False, _BOOL),
                           ctx.get("compensation.k_w", 0.01), ctx.get("compensation.limit", 0.05))
    if comp.limit < 0:
        raise ctx.err("compensation.limit", "must be non-negative")
    if comp.enabled and not ctx.has("compensation.limit"):
        ctx.applied.append("compensation.limit = +-0.05 duty")
    hd = HdcscCfg(ctx.get("hdcsc.enabled", False, _BOOL), ctx.get("hdcsc.apply_to", "compensation", _STR))
    if hd.apply_to not in ("compensation", "duty"):
        raise ctx.err("hdcsc.apply_to", "must be 'compensation' or 'duty'")
    if hd.enabled and not ctx.has("hdcsc.apply_to"):
        ctx.applied.append("hdcsc.apply_to = compensation (delays act on D_c)")

    # references
    ref_key = "references.u_ref" if mode == "voltage" else "references.i_ref"
    other = "references.i_ref" if mode == "voltage" else "references.u_ref"
    if not ctx.has(ref_key):
        raise ctx.err(ref_key, "required")
    if ctx.has(other):
        raise ctx.err(other, f"not used in {mode} mode")
    ref = ctx.get(ref_key)
    _positive(ctx, ref_key, ref, allow_zero=True)
    ref_steps = []
    for i, ev in enumerate(ctx.section("references").get("steps") or []):
        key = f"references.steps[{i}]"
        if not isinstance(ev, dict) or set(ev) != {"t", "value"}:
            raise ctx.err(key, "each reference step needs exactly keys t and value")
        ref_steps.append((ctx.coerce(f"{key}.t", ev["t"], _NUM), ctx.coerce(f"{key}.value", ev["value"], _NUM)))
    references = ReferencesCfg(ref, tuple(ref_steps))

    # clock
    t_end = ctx.get("clock.t_end")
    _positive(ctx, "clock.t_end", t_end)
    dt_plant = ctx.get("clock.dt_plant", 2e-6)
    _positive(ctx, "clock.dt_plant", dt_plant)
    if dt_plant > 1.0 / plant.f_s:
        raise ctx.err("clock.dt_plant", "must not exceed the control period 1/f_s")
    clock = ClockCfg(t_end, dt_plant)
    for i, (t_ev, _v) in enumerate(load_events):
        if not 0 <= t_ev <= t_end:
            raise ctx.err(f"load.events[{i}].t", f"time {t_ev:g} outside [0, t_end]")
    for i, (t_ev, _v) in enumerate(ref_steps):
        if not 0 <= t_ev <= t_end:
            raise ctx.err(f"references.steps[{i}].t", f"time {t_ev:g} outside [0, t_end]")
    for i, ev in enumerate(topo_events):
        if not 0 <= ev[0] <= t_end:
            raise ctx.err(f"topology.events[{i}].t", f"time {ev[0]:g} outside [0, t_end]")

    # initial state
    u_o0 = ctx.get("initial.u_o", 0.0)
    _positive(ctx, "initial.u_o", u_o0, allow_zero=True)
    u_c10 = ctx.get("initial.u_C1")
    if u_c10 is not None:
        _positive(ctx, "initial.u_C1", u_c10, allow_zero=True)
    elif link == "rectifier":
        ctx.applied.append("initial.u_C1 = mean rectified voltage (DC link precharged)")
    if link == "ideal" and u_c10 is None:
        u_c10 = grid.u_d0

    # outputs
    traces = ctx.section("outputs").get("traces")
    if traces is not None:
        if not isinstance(traces, list) or not traces or not all(isinstance(t, str) for t in traces):
            raise ctx.err("outputs.traces", "must be a non-empty list of trace names or patterns")
        traces = tuple(traces)
    outputs = OutputsCfg(
        traces=traces or OutputsCfg.traces,
        rate=ctx.get("outputs.rate", 10e3),
        ripple_window=ctx.get("outputs.ripple_window", 0.1),
        settle_band=ctx.get("outputs.settle_band", 0.02),
        sag_band=ctx.get("outputs.sag_band", 0.02),
        tone_freq=ctx.get("outputs.tone_freq"),
        plots=ctx.get("outputs.plots", True, _BOOL),
    )
    for k in ("rate", "ripple_window"):
        _positive(ctx, f"outputs.{k}", getattr(outputs, k))
    for k in ("settle_band", "sag_band"):
        if not 0 < getattr(outputs, k) < 0.5:
            raise ctx.err(f"outputs.{k}", "must lie in (0, 0.5)")
    if outputs.ripple_window > t_end:
        raise ctx.err("outputs.ripple_window", "longer than the run")

    # optional sweep declared with the scenario
    sweep = None
    if ctx.data.get("sweep") is not None:
        param = ctx.get("sweep.param", kind=_STR)
        if param is None:
            raise ctx.err("sweep.param", "required when a sweep section is given")
        vals = ctx.section("sweep").get("values")
        if not isinstance(vals, list) or not vals:
            raise ctx.err("sweep.values", "must be a non-empty list of numbers")
        param = canonical_path(param)
        if param not in SWEEPABLE:
            raise ctx.err("sweep.param", f"{param} is not a sweepable numeric parameter")
        sweep = (param, tuple(ctx.coerce(f"sweep.values[{i}]", v, _NUM) for i, v in enumerate(vals)))

    return Scenario(
        name=name, grid=grid, plant=plant, plant_ideal_link=(link == "ideal"), topology=topology,
        controller=controller, compensation=comp, hdcsc=hd, references=references,
        load=LoadCfg(R, tuple(load_events)), clock=clock, seed=seed, outputs=outputs,
        initial_u_o=u_o0, initial_u_C1=u_c10, sweep=sweep, defaults_applied=tuple(ctx.applied),
        source=source, raw=copy.deepcopy(data),
    )


def with_override(sc: Scenario, path: str, value, sweep: bool = True) -> Scenario:
    """Re-validate the scenario with one key replaced.

    With ``sweep`` set, only whitelisted numeric keys are accepted.
    """
    path = canonical_path(path)
    if sweep and path not in SWEEPABLE:
        raise ScenarioError(path, "is not a sweepable numeric parameter")
    data = copy.deepcopy(sc.raw)
    if "." in path:
        sec, k = path.split(".", 1)
        if data.get(sec) is None:
            data[sec] = {}
        data[sec][k] = value
    else:
        data[path] = value
    return scenario_from_mapping(data, {}, f"{sc.source} [{path}={value}]")


def catalog_names() -> list[str]:
    return sorted(p.stem for p in CATALOG_DIR.glob("*.yaml"))
