import csv
import io
import json

import pytest

from wmdistill import bell_edp, cli, oracle
from wmdistill.exceptions import ConfigError
from wmdistill.sweep import AxisRange, SweepConfig, evaluate_point, figure_config, run_sweep, write_outputs


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_axis_range_parsing():
    assert AxisRange.parse("0:0.3:0.1").values() == [0.0, 0.1, 0.2, 0.3]
    assert AxisRange.parse([0.1, 0.2, 0.05]).values() == [0.1, 0.15, 0.2]
    assert AxisRange.parse(0.4).values() == [0.4]
    for bad in ("a:b:c", "0:1", "0:1:0", "1:0:0.1"):
        with pytest.raises(ConfigError):
            AxisRange.parse(bad).values()


def test_config_validation():
    with pytest.raises(ConfigError):
        SweepConfig("nope").validate()
    with pytest.raises(ConfigError):
        SweepConfig("ghz", {"d": "0:1.2:0.1"}).validate()
    with pytest.raises(ConfigError):
        SweepConfig("ghz", {"d1": "0:0.2:0.1"}).validate()
    with pytest.raises(ConfigError):
        SweepConfig("w-state", fixed={"epsilon": 0.0}).validate()
    with pytest.raises(ConfigError):
        SweepConfig.from_dict({"protocol": "ghz", "colour": 1})


def test_config_round_trip():
    cfg = figure_config("6")
    again = SweepConfig.from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()


def test_points_are_row_major():
    cfg = SweepConfig("ghz", {"d": "0:0.1:0.1", "w": "0:0.2:0.1"})
    assert [(p["d"], p["w"]) for p in cfg.points()] == [
        (0.0, 0.0), (0.0, 0.1), (0.0, 0.2), (0.1, 0.0), (0.1, 0.1), (0.1, 0.2)
    ]


def test_out_of_regime_points_keep_status():
    pt = {"d": 0.3, "w": 0.1, "N": 3, "epsilon": 1e-6, "m": 10, "n": 32}
    assert evaluate_point("w-state", pt)["status"] == "not-distillable"
    assert evaluate_point("w-ratio", {**pt, "w": 0.5})["status"] == "nrwm-only"
    assert evaluate_point("w-asymptotic", pt)["status"] == "domain"
    header, rows = run_sweep(SweepConfig("w-state", {"d": "0.2:0.3:0.1"}, {"w": 0.1}))
    assert [r[-1] for r in rows] == ["ok", "not-distillable"]


def test_sweep_values_match_library(tmp_path):
    out = tmp_path / "bell.csv"
    code = cli.main(["sweep", "--protocol", "bell-twocopy", "--d1", "0.3", "--d2", "0.7",
                     "--w1", "0:0.2:0.1", "--w2", "0.1", "--m", "3", "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 3
    for row in rows:
        s = bell_edp.BellScenario(0.3, 0.7, float(row["w1"]), 0.1)
        assert float(row["E_f"]) == bell_edp.two_copy_efficiency(s, 3).cumulative
    meta = json.loads((tmp_path / "bell.csv.meta.json").read_text())
    assert meta["config"]["protocol"] == "bell-twocopy" and meta["config"]["jobs"] is None


def test_sweep_from_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"protocol": "ghz", "axes": {"d": "0.1:0.2:0.1"}, "fixed": {"w": 0.1, "m": 3}}))
    assert cli.main(["sweep", "--config", str(cfg)]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["d"] for r in rows] == ["0.10000000000000001", "0.20000000000000001"]


def test_config_errors_exit_2(tmp_path, capsys):
    assert cli.main(["sweep", "--protocol", "ghz", "--d", "1.2"]) == 2
    assert cli.main(["sweep"]) == 2
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["frobnicate"]) == 2
    assert cli.main(["figure", "42"]) == 2
    assert "config error" in capsys.readouterr().err


def test_optimal_w_command(tmp_path):
    out = tmp_path / "opt.csv"
    assert cli.main(["optimal-w", "--N", "3", "--d", "0.1:0.3:0.1", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [r["status"] for r in rows] == ["ok", "ok", "ok"]
    assert rows[2]["E_unfiltered"] == ""
    assert float(rows[0]["E_opt"]) >= float(rows[0]["E_unfiltered"])


def test_validate_command(tmp_path, capsys):
    out = tmp_path / "report.csv"
    assert cli.main(["validate", "--samples", "2", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows and all(r["pass"] == "True" for r in rows)
    assert "checks passed" in capsys.readouterr().err


def test_validate_rejects_six_parties():
    assert cli.main(["validate", "--samples", "1", "--N", "6"]) == 2


def test_validate_fails_on_perturbed_closed_form(monkeypatch, tmp_path):
    original = bell_edp.two_copy_round

    def skewed(p):
        p1, p0, nxt = original(p)
        return p1 + 1e-10, p0, nxt

    monkeypatch.setattr(bell_edp, "two_copy_round", skewed)
    assert cli.main(["validate", "--samples", "2", "--out", str(tmp_path / "r.csv")]) == 1


def test_figure_determinism_small(tmp_path):
    """Serial and pooled runs of a small grid write the same bytes."""
    paths = []
    for jobs in (1, 3):
        path = tmp_path / f"fig_{jobs}.csv"
        cfg = SweepConfig("w-ratio", {"d": "0.05:0.2:0.05", "w": "0:0.9:0.1"}, {"N": 3}, str(path), jobs)
        header, rows = run_sweep(cfg)
        write_outputs(cfg, header, rows, str(path))
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert (tmp_path / "fig_1.csv.meta.json").read_bytes() == (tmp_path / "fig_3.csv.meta.json").read_bytes()


def test_oracle_default_seed_recorded():
    assert oracle.run_all(samples=1).seed == oracle.DEFAULT_SEED
