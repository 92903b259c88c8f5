import csv

import pytest

from ipopsim import SimulationAbort
from ipopsim.cli import main, parse_assertion

FAST = "syn_single_ideal"


def _rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "single"
    assert main(["run", FAST, "--out", str(out)]) == 0
    return out


def test_run_writes_outputs(run_dir):
    names = {p.name for p in run_dir.iterdir()}
    assert {"traces.csv", "metrics.csv", "report.txt", "i_o_total.svg", "u_i.svg"} <= names
    assert not [p for p in run_dir.parent.iterdir() if p.name.startswith(".")]


def test_csv_columns_and_rate(run_dir):
    from ipopsim import parse_scenario
    sc = parse_scenario(FAST)
    with open(run_dir / "traces.csv") as fh:
        header = next(csv.reader(fh))
        n = sum(1 for _ in fh)
    assert header[0] == "time"
    assert n == pytest.approx(sc.clock.t_end * 10e3 + 1, abs=1)


def test_csv_column_order_is_declared_order(tmp_path):
    from ipopsim.scenario import parse_scenario
    raw = dict(parse_scenario(FAST).raw)
    raw["outputs"] = {**raw.get("outputs", {}), "traces": ["u_o", "m01.D", "i_o_total"],
                      "plots": False}
    import yaml
    p = tmp_path / "order.yaml"
    p.write_text(yaml.safe_dump(raw))
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 0
    header = (tmp_path / "o" / "traces.csv").read_text().splitlines()[0].split(",")
    assert header == ["time", "u_o", "m01.D", "i_o_total"]


def test_full_rate_flag(tmp_path):
    assert main(["--full-rate", "run", FAST, "--out", str(tmp_path / "f")]) == 0
    from ipopsim import parse_scenario
    sc = parse_scenario(FAST)
    n = len((tmp_path / "f" / "traces.csv").read_text().splitlines()) - 1
    assert n == pytest.approx(sc.clock.t_end * sc.plant.f_s + 1, abs=1)


def test_report_regenerates_identically(tmp_path, run_dir):
    assert main(["run", FAST, "--out", str(tmp_path / "again")]) == 0
    for f in ("traces.csv", "metrics.csv", "report.txt", "i_o_total.svg"):
        assert (tmp_path / "again" / f).read_bytes() == (run_dir / f).read_bytes()


def test_report_lists_deviations(run_dir):
    text = (run_dir / "report.txt").read_text()
    assert "[deviations]" in text and "[metrics]" in text
    assert "plant.R_d" in text


def test_assert_exit_codes(tmp_path):
    assert main(["run", FAST, "--out", str(tmp_path / "a"), "--assert", "settling_time<=1"]) == 0
    assert main(["run", FAST, "--out", str(tmp_path / "b"), "--assert", "ripple_pp<0"]) == 4
    with pytest.raises(Exception):
        parse_assertion("ripple is small")


def test_validation_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("controller:\n  kind: fuzzy\nclock:\n  t_end: 0.1\n")
    assert main(["run", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x").exists()


def test_abort_leaves_no_partial_outputs(tmp_path, monkeypatch):
    def boom(sc, **kw):
        raise SimulationAbort("state exceeds bound", t=0.01)
    monkeypatch.setattr("ipopsim.cli.run_simulation", boom)
    out = tmp_path / "aborted"
    assert main(["run", FAST, "--out", str(out)]) == 3
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_compare_one_and_identical(tmp_path):
    assert main(["compare", FAST, "--out", str(tmp_path / "c1")]) == 0
    assert len(_rows(tmp_path / "c1" / "comparison.csv")) == 1
    assert main(["compare", FAST, FAST, "--out", str(tmp_path / "c2")]) == 0
    a, b = _rows(tmp_path / "c2" / "comparison.csv")
    assert a == b
    assert (tmp_path / "c2" / "overlay.csv").exists()


def test_sweep_errors(tmp_path):
    assert main(["sweep", FAST, "--param", "plant.C2", "--values", ",", "--out", str(tmp_path / "s")]) == 2
    assert main(["sweep", FAST, "--param", "controller.kind", "--values", "1",
                 "--out", str(tmp_path / "s")]) == 2
    assert main(["sweep", FAST, "--out", str(tmp_path / "s")]) == 2     # no sweep section


def test_sweep_csv(tmp_path):
    assert main(["--workers", "2", "sweep", FAST, "--param", "load.R", "--values", "0.12,0.2",
                 "--out", str(tmp_path / "s")]) == 0
    text = (tmp_path / "s" / "sweep.csv").read_text()
    assert text.startswith("# param = load.R\n")
    rows = _rows(tmp_path / "s" / "sweep.csv")
    assert [float(r["value"]) for r in rows] == [0.12, 0.2]
    assert list(rows[0])[:3] == ["value", "scenario", "digest"]
    assert rows[0]["digest"] != rows[1]["digest"]


def test_catalog_list(capsys):
    assert main(["catalog", "list"]) == 0
    out = capsys.readouterr().out
    assert "fig11_pi" in out and "fig17_full" in out


# ------------------------------------------------------------------ catalog claims
def test_aladrc_settles_fast(sim):
    assert sim("fig11_aladrc").metrics.settling_time <= 0.05


def test_pi_ripple_in_hardware_band(sim):
    assert 90.0 <= sim("fig11_pi").metrics.ripple_pp <= 170.0


def test_compare_ripple_strictly_decreasing(sim):
    r = [sim(n).metrics.ripple_pp for n in ("fig11_pi", "fig11_ladrc", "fig11_full")]
    assert r[0] > r[1] > r[2]


@pytest.mark.slow
def test_pi_ripple_non_increasing_in_c2(sim):
    vals = [800e-6, 1500e-6, 2500e-6, 3500e-6]
    r = [sim("fig12_sweep_pi", plant__C2=v).metrics.ripple_pp for v in vals]
    assert all(a >= b for a, b in zip(r, r[1:])), r
