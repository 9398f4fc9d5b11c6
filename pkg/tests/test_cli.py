import csv

import pytest

from chiplet_sim.cli import compare_verdicts, main
from chiplet_sim.report import LATENCY_HEADER, POWER_HEADER, SWEEP_HEADER


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_artifacts(tmp_path):
    assert main(["run", "--preset", "exp1", "--seed", "7", "--out", str(tmp_path)]) == 0
    for name in ("latency.csv", "power.csv", "summary.json", "latency.svg", "power.svg"):
        assert (tmp_path / name).exists()
    assert rows(tmp_path / "latency.csv")[0] == LATENCY_HEADER
    assert rows(tmp_path / "power.csv")[0] == POWER_HEADER
    assert len(rows(tmp_path / "latency.csv")) == 3


def test_latency_csv_uses_three_decimal_ns(tmp_path):
    main(["run", "--preset", "exp1", "--out", str(tmp_path), "--no-plots"])
    for r in rows(tmp_path / "latency.csv")[1:]:
        for v in r[2:]:
            assert len(v.split(".")[1]) == 3


def test_unknown_preset_is_usage_error(tmp_path, capsys):
    assert main(["run", "--preset", "exp9", "--out", str(tmp_path / "o")]) == 64
    assert "exp1|exp2|exp3" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["run"], ["run", "--preset", "exp1", "--config", "x.yaml"],
                                  ["run", "--preset", "exp1", "--seed", "-1"], ["sweep", "--preset", "exp1"]])
def test_bad_flags(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path)] if argv[:1] == ["run"] else [])) == 64


def test_invalid_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("dies:\n  - id: d0\n    drams: [{id: m0, access_latency: -1}]\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path / "o")]) == 2


def test_same_seed_gives_identical_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", "--preset", "exp2", "--seed", "5", "--out", str(d)]) == 0
    for name in ("latency.csv", "power.csv", "latency.svg", "power.svg", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_compare_with_unknown_preset_writes_nothing(tmp_path):
    out = tmp_path / "cmp"
    assert main(["compare", "--presets", "exp1,exp9", "--out", str(out)]) == 64
    assert not out.exists()


def test_compare_verdict_lines():
    lines = compare_verdicts({"exp1": (3.0, 1.0), "exp2": (1.0, 2.0), "exp3": (2.0, 3.0)})
    assert lines[0] == "latency order: exp2 < exp3 < exp1"
    assert lines[1] == "power order: exp1 < exp2 < exp3"
    assert all(l.endswith("PASS") for l in lines[2:])


def test_sweep_single_value(tmp_path):
    assert main(["sweep", "--preset", "exp2", "--param", "d2d_links.0.bandwidth_bytes_per_ns",
                 "--values", "32", "--out", str(tmp_path)]) == 0
    r = rows(tmp_path / "sweep.csv")
    assert r[0] == SWEEP_HEADER and len(r) == 2 and r[1][0] == "32"


def test_sweep_bad_keypath(tmp_path):
    assert main(["sweep", "--preset", "exp2", "--param", "dies.0.nonsense", "--values", "1",
                 "--out", str(tmp_path)]) == 2


def test_sweep_non_numeric_field(tmp_path):
    assert main(["sweep", "--preset", "exp2", "--param", "dies.0.id", "--values", "1",
                 "--out", str(tmp_path)]) == 2


def test_sweep_invalid_value(tmp_path):
    assert main(["sweep", "--preset", "exp2", "--param", "dies.*.drams.*.access_latency", "--values", "-5",
                 "--out", str(tmp_path)]) == 2


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("run")
    assert main(["run", "--preset", "exp1", "--out", str(d), "--no-plots"]) == 0
    return d


def test_plot_power_trace_has_two_polylines(run_dir, tmp_path):
    out = tmp_path / "p.svg"
    assert main(["plot", "--csv", str(run_dir / "power.csv"), "--kind", "power-trace", "--out", str(out)]) == 0
    assert out.read_text().count("<polyline") == 2


def test_plot_is_reproducible(run_dir, tmp_path):
    outs = [tmp_path / "a.svg", tmp_path / "b.svg"]
    for o in outs:
        assert main(["plot", "--csv", str(run_dir / "latency.csv"), "--kind", "latency-hist", "--out", str(o)]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()


def test_plot_empty_csv(tmp_path):
    p = tmp_path / "power.csv"
    p.write_text(",".join(POWER_HEADER) + "\n")
    assert main(["plot", "--csv", str(p), "--kind", "power-trace", "--out", str(tmp_path / "x.svg")]) == 2


def test_plot_malformed_csv(tmp_path):
    p = tmp_path / "latency.csv"
    p.write_text("a,b\n1,2\n")
    assert main(["plot", "--csv", str(p), "--kind", "latency-hist"]) == 2
