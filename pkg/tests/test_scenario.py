import textwrap

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ipopsim import ScenarioError, parse_scenario, with_override
from ipopsim.scenario import REQUIRED, SWEEPABLE, catalog_names, scenario_from_mapping

MINIMAL = """\
name: tiny
controller:
  kind: ladrc
references:
  i_ref: 8000
load:
  R: 0.01
clock:
  t_end: 0.2
outputs:
  ripple_window: 0.05
"""


def write(tmp_path, text, name="s.yaml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


@pytest.mark.parametrize("name", catalog_names())
def test_catalog_parses(name):
    sc = parse_scenario(name)
    assert sc.name == name
    assert len(sc.digest()) == 16


def test_catalog_has_required_entries():
    names = set(catalog_names())
    assert {"fig11_pi", "fig11_ladrc", "fig11_aladrc", "fig12_sweep", "fig15_pi_loadstep",
            "fig16_aladrc_loadstep", "fig17_full"} <= names


def test_rated_values():
    sc = parse_scenario("rated")
    assert (sc.controller.wc0, sc.controller.w0) == (400.0, 2800.0)
    assert sc.compensation.k_w == 0.01
    assert sc.plant.f_s == 15e3
    assert sc.n_modules == 12


def test_empty_controller_section(tmp_path):
    p = write(tmp_path, MINIMAL.replace("  kind: ladrc\n", "  {}\n"))
    with pytest.raises(ScenarioError, match="controller.kind required"):
        parse_scenario(p)


def test_slow_observer_rejected(tmp_path):
    p = write(tmp_path, MINIMAL.replace("kind: ladrc", "kind: ladrc\n  wc0: 400\n  w0: 100"))
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(p)
    assert ei.value.key == "controller.w0"
    assert ei.value.line == 5


def test_unknown_key_names_line(tmp_path):
    p = write(tmp_path, MINIMAL.replace("  R: 0.01", "  R: 0.01\n  Rl: 3"))
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(p)
    assert ei.value.key == "load.Rl"
    assert ei.value.line == 8
    assert "line 8" in str(ei.value)


@pytest.mark.parametrize("key", REQUIRED)
def test_removing_required_key_names_it(tmp_path, key):
    sec, k = key.split(".")
    lines = [ln for ln in MINIMAL.splitlines() if not ln.strip().startswith(f"{k}:")]
    p = write(tmp_path, "\n".join(lines) + "\n")
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(p)
    assert ei.value.key == key


def test_missing_reference_named(tmp_path):
    p = write(tmp_path, MINIMAL.replace("  i_ref: 8000\n", "  {}\n"))
    with pytest.raises(ScenarioError, match="references.i_ref"):
        parse_scenario(p)


def test_exponent_strings_coerced(tmp_path):
    p = write(tmp_path, MINIMAL + "plant:\n  C2: 3500e-6\n")
    assert parse_scenario(p).plant.C2 == 3.5e-3


def test_bad_number_named(tmp_path):
    p = write(tmp_path, MINIMAL + "plant:\n  C2: lots\n")
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(p)
    assert ei.value.key == "plant.C2"


def test_event_outside_run_rejected():
    data = {"controller": {"kind": "pi"}, "references": {"i_ref": 10.0}, "load": {"R": 1.0,
            "events": [{"t": 0.5, "R": 2.0}]}, "clock": {"t_end": 0.2},
            "outputs": {"ripple_window": 0.05}}
    with pytest.raises(ScenarioError, match="outside"):
        scenario_from_mapping(data)


def test_invalid_yaml(tmp_path):
    p = write(tmp_path, "controller: [unclosed\n")
    with pytest.raises(ScenarioError):
        parse_scenario(p)


def test_missing_file():
    with pytest.raises(ScenarioError):
        parse_scenario("no_such_scenario")


def test_deviation_ledger_lists_exactly_the_unset_defaults():
    full = parse_scenario("fig11_full").defaults_applied
    keys = [d.split(" ")[0] for d in full]
    assert keys == ["plant.n", "plant.R_d", "plant.R_s", "topology.mismatch", "controller.b0",
                    "controller.k_s", "controller.hysteresis", "compensation.limit",
                    "hdcsc.apply_to", "initial.u_C1"]
    rated = [d.split(" ")[0] for d in parse_scenario("rated").defaults_applied]
    assert "plant.n" not in rated                  # stated in the file
    assert "controller.k_s" not in rated           # LADRC without adaptation


def test_stating_a_default_removes_it_from_ledger():
    sc = parse_scenario("fig11_full")
    sc2 = with_override(sc, "controller.k_s", 100.0, sweep=False)
    assert not any(d.startswith("controller.k_s") for d in sc2.defaults_applied)
    assert sc2.controller.k_s == sc.controller.k_s
    assert sc2.digest() == sc.digest()


def test_override_whitelist_and_aliases():
    sc = parse_scenario("fig11_ladrc")
    assert with_override(sc, "plant.C2", 800e-6).plant.C2 == 800e-6
    assert with_override(sc, "control.ωc0", 300.0).controller.wc0 == 300.0
    with pytest.raises(ScenarioError):
        with_override(sc, "controller.kind", "pi")
    with pytest.raises(ScenarioError):
        with_override(sc, "grid.m", 12)
    assert "plant.C2" in SWEEPABLE and "controller.wc0" in SWEEPABLE


def test_override_is_revalidated():
    sc = parse_scenario("fig11_ladrc")
    with pytest.raises(ScenarioError):
        with_override(sc, "controller.w0", 50.0)


@given(st.floats(1e-4, 1e-2))
def test_digest_tracks_content(c2):
    sc = parse_scenario("fig11_ladrc")
    a = with_override(sc, "plant.C2", c2)
    b = with_override(sc, "plant.C2", c2)
    assert a.digest() == b.digest()
    if c2 != sc.plant.C2:
        assert a.digest() != sc.digest()


def test_sweep_section():
    sc = parse_scenario("fig12_sweep")
    assert sc.sweep == ("plant.C2", (800e-6, 1500e-6, 2500e-6, 3500e-6))
    base = {"controller": {"kind": "pi"}, "references": {"i_ref": 10.0}, "load": {"R": 1.0},
            "clock": {"t_end": 0.2}, "outputs": {"ripple_window": 0.05}}
    for bad in ({"param": "controller.kind", "values": [1]}, {"param": "plant.C2", "values": []},
                {"values": [1.0]}):
        with pytest.raises(ScenarioError, match="sweep"):
            scenario_from_mapping({**base, "sweep": bad})
