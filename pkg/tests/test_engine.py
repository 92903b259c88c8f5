import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipopsim import parse_scenario, run_simulation, with_override
from ipopsim.engine import (DelayLine, SimClock, SimulationAbort, Trace, delay_read_write,
                            integrate_step)


# ---------------------------------------------------------------- integrator
def test_rk4_exponential_step():
    x = integrate_step([1.0], lambda t, y: -y, 0.0, 0.1)
    assert x[0] == pytest.approx(0.9048375, abs=1e-7)
    assert abs(x[0] - math.exp(-0.1)) < 1e-7


def test_rk4_trivial_cases():
    assert integrate_step([0.0], lambda t, y: 0 * y, 0.0, 0.1)[0] == 0.0
    assert integrate_step([0.0], lambda t, y: np.ones(1), 0.0, 0.5)[0] == 0.5
    with pytest.raises(ValueError):
        integrate_step([0.0], lambda t, y: y, 0.0, 0.0)


def _lc_error(h, L=1e-3, C=1e-3, t_end=0.2):
    w = 1 / math.sqrt(L * C)
    x = np.array([1.0, 0.0])      # capacitor voltage, inductor current

    def f(t, s):
        return np.array([-s[1] / C, s[0] / L])

    n = int(round(t_end / h))
    for i in range(n):
        x = integrate_step(x, f, i * h, h)
    return abs(x[0] - math.cos(w * t_end))


def test_rk4_order_on_lc_circuit():
    e1, e2, e3 = _lc_error(4e-4), _lc_error(2e-4), _lc_error(1e-4)
    assert e1 / e2 >= 14.0
    assert e2 / e3 >= 14.0


def test_non_finite_derivative_names_index():
    def f(t, s):
        return np.array([0.0, math.inf, 0.0])
    with pytest.raises(SimulationAbort) as ei:
        integrate_step([1.0, 1.0, 1.0], f, 0.25, 0.1)
    assert ei.value.diagnostics["state_index"] == 1
    assert "index 1" in str(ei.value)


# ---------------------------------------------------------------- clock
def test_clock_snaps_to_whole_substeps():
    c = SimClock.for_rate(15e3, 2e-6, 1.0)
    assert c.substeps == 34        # ceil((1/15e3)/2e-6)
    assert c.dt_plant <= 2e-6
    assert c.substeps * c.dt_plant == pytest.approx(1 / 15e3, rel=1e-12)
    assert c.n_ticks == 15000


def test_clock_rejects_fractional_ratio():
    with pytest.raises(ValueError):
        SimClock(3e-6, 1 / 15e3, 1.0)


# ---------------------------------------------------------------- delay lines
def test_zero_delay_is_identity():
    line = DelayLine(0.0, 1e-4)
    xs = np.random.default_rng(1).standard_normal(50)
    assert [line.step(v) for v in xs] == list(xs)


def test_prehistory_is_fill():
    line = DelayLine(5e-4, 1e-4, fill=0.0)
    out = [line.step(1.0) for _ in range(5)]
    assert out == [0.0] * 5
    assert line.step(1.0) == 1.0


def test_delayed_sinusoid_phase():
    dt = 1e-5                     # 1.1 ms is exactly 110 samples here
    line = DelayLine(1.1e-3, dt)
    assert line.steps == 110 and abs(line.quantization_error) < 1e-15
    t = np.arange(4000) * dt
    x = np.sin(2 * math.pi * 300 * t)
    y = np.array([delay_read_write(line, v, tt) for v, tt in zip(x, t)])
    np.testing.assert_allclose(y[110:], np.sin(2 * math.pi * 300 * (t[110:] - 1.1e-3)), atol=1e-12)
    assert math.degrees(2 * math.pi * 300 * 1.1e-3) == pytest.approx(118.8)


def test_quantization_to_control_grid():
    line = DelayLine(1.1e-3, 1 / 15e3)
    assert line.steps == 17
    assert line.delay == pytest.approx(1.1333e-3, abs=1e-7)
    assert abs(line.quantization_error) <= 0.5 / 15e3 + 1e-15


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 40), st.integers(0, 40), st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=120))
def test_delay_composition(d1, d2, xs):
    dt = 1 / 15e3
    a, b, c = DelayLine(d1 * dt, dt), DelayLine(d2 * dt, dt), DelayLine((d1 + d2) * dt, dt)
    assert [b.step(a.step(v)) for v in xs] == [c.step(v) for v in xs]


def test_negative_delay_rejected():
    with pytest.raises(ValueError):
        DelayLine(-1e-3, 1e-4)


# ---------------------------------------------------------------- traces
def test_trace_is_read_only_and_windows():
    tr = Trace("x", 0.0, 0.1, np.arange(10.0))
    with pytest.raises(ValueError):
        tr.samples[0] = 5.0
    w = tr.window(0.3, 0.6)
    assert w.t0 == pytest.approx(0.3)
    np.testing.assert_array_equal(w.samples, [3.0, 4.0, 5.0, 6.0])


# ---------------------------------------------------------------- closed loop
def test_zero_reference_stays_off(sim):
    run = sim("syn_zero_ref")
    assert np.all(run.res["m01.D"].samples == 0.0)
    assert np.all(run.res["u_o"].samples == 0.0)


def test_zero_duty_bus_decays():
    """Bridges held off: a precharged bus discharges into the load."""
    from ipopsim.scenario import scenario_from_mapping
    sc = scenario_from_mapping({
        "controller": {"kind": "pi", "kp_pi": 0.0, "ki_pi": 0.0},
        "references": {"i_ref": 0.0}, "load": {"R": 0.01},
        "initial": {"u_o": 5.0}, "clock": {"t_end": 0.05},
        "outputs": {"ripple_window": 0.01},
    })
    res = run_simulation(sc)
    assert np.all(res["m01.D"].samples == 0.0)
    u = res["u_o"].samples
    assert u[0] == 5.0
    assert u[-1] < 1e-6
    assert np.all(np.diff(u) <= 0.0)


def test_pi_settles_near_reference(sim):
    io = sim("fig11_pi").res["i_o_total"].window(0.8).samples
    assert abs(io.mean() - 8000.0) < 0.005 * 8000


def test_single_module_dc_gain():
    """Ideal link, constant duty after settling: u_o equals the model DC gain times D."""
    from ipopsim.plant import g_uod
    sc = parse_scenario("syn_single_ideal")
    res = run_simulation(sc)
    D = res["m01.D"].samples[-1]
    p = sc.plant
    u = res["u_o"].samples[-1]
    assert u == pytest.approx(abs(g_uod(p, sc.grid.u_d0)(0.0)) * D, rel=2e-3)


def test_module_drop_redistributes(sim):
    run = sim("syn_module_drop")
    assert run.res["m05.i_o"].samples[-1] == 0.0
    assert run.res["m05.D"].window(0.31).samples.max() == 0.0
    io = run.res["i_o_total"].window(0.5).samples
    assert abs(io.mean() - 8000) < 0.005 * 8000
    share = run.res["m01.i_o"].window(0.5).samples.mean()
    assert share == pytest.approx(8000 / 11, rel=0.02)


def test_load_event_resolved_inside_control_period():
    base = parse_scenario("fig16_aladrc_loadstep")
    grid = 1 / 15e3

    def final(t_ev):
        from ipopsim.scenario import scenario_from_mapping
        data = dict(base.raw)
        data["load"] = {"R": 10000.0, "events": [{"t": t_ev, "R": 0.0035}]}
        data["clock"] = {"t_end": 0.3}
        data["outputs"] = {"ripple_window": 0.05}
        return run_simulation(scenario_from_mapping(data)).meta["final_state"]

    on_tick = final(200 * grid)
    mid_tick = final(200.5 * grid)
    assert on_tick != mid_tick


def test_abort_on_bound():
    sc = parse_scenario("syn_single_ideal")
    with pytest.raises(SimulationAbort) as ei:
        run_simulation(sc, abort_bound=100.0)
    assert ei.value.t is not None
    assert "exceeds bound" in str(ei.value)


def test_hdcsc_delay_metadata(sim):
    meta = sim("fig11_full").res.meta
    assert meta["delay_steps"] == [0, 17, 33, 4, 21, 38, 8, 25, 42, 12, 29, 46]
    assert meta["delay_max_quantization"] <= 0.5 / 15e3 + 1e-15


def test_runs_repeat_exactly():
    sc = parse_scenario("syn_single_ideal")
    a, b = run_simulation(sc), run_simulation(sc)
    for name in a.traces:
        assert a[name].samples.tobytes() == b[name].samples.tobytes()
