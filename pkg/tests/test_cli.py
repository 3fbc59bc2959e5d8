import csv
import json
import subprocess
import sys

import pytest

from tricycle import cli
from tricycle.exceptions import IntegratorError


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out.read_text() if out.exists() else None


def rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def test_sweep_columns_and_header(tmp_path):
    code, text = run(tmp_path, "sweep", "--alpha", "0.8", "--tau-c", "15", "--tau-p", "20")
    assert code == 0
    first, header = text.splitlines()[:2]
    assert first.startswith("# tricycle-sweep/1") and "root-policy" in first
    assert header.split(",") == cli.SWEEP_COLUMNS
    data = rows(text)
    assert len(data) == 1
    assert data[0]["status"] == "OK"
    assert float(data[0]["lh"]) >= float(data[0]["rh"])
    assert "\r" not in text


def test_default_params_example_point_is_flagged_infeasible(tmp_path):
    code, text = run(tmp_path, "verify-bound", "--alpha", "0.8", "--tau-c", "20", "--tau-p", "20")
    assert code == 0
    assert rows(text)[0]["status"] == "INFEASIBLE"


def test_infeasible_rows_do_not_fail(tmp_path):
    code, text = run(tmp_path, "verify-bound", "--alpha", "0.8", "--tau-c", "10,15,20", "--tau-p", "20")
    assert code == 0
    assert [r["status"] for r in rows(text)] == ["OK", "OK", "INFEASIBLE"]


def test_violation_exit_code(tmp_path):
    code, text = run(tmp_path, "verify-bound", "--alpha", "0", "--tau-c", "10", "--tau-p", "10")
    assert code == 1
    assert rows(text)[0]["status"] == "VIOLATION"


def test_emitted_rows_respect_second_law(tmp_path):
    _, text = run(tmp_path, "sweep", "--alpha", "0.8,1.2", "--tau-c", "10:40:5", "--tau-p", "40")
    data = [r for r in rows(text) if r["status"] != "INFEASIBLE"]
    assert data
    for r in data:
        assert float(r["eps"]) <= float(r["eps_r"])
        assert float(r["dS_en"]) >= 0


def test_empty_grid_is_usage_error(tmp_path):
    assert cli.main(["verify-bound", "--tau-c", ""]) == 2
    assert cli.main(["sweep", "--alpha", ""]) == 2


def test_bad_flag_is_usage_error():
    assert cli.main(["sweep", "--no-such-flag"]) == 2


def test_determinism_across_runs_and_threads(tmp_path, monkeypatch):
    args = ["sweep", "--alpha", "0.4,0.8", "--tau-c", "10:40:10", "--tau-p", "20:40:10"]
    monkeypatch.setenv("TRICYCLE_THREADS", "1")
    _, a = run(tmp_path, *args, name="a.csv")
    monkeypatch.setenv("TRICYCLE_THREADS", "4")
    _, b = run(tmp_path, *args, name="b.csv")
    _, c = run(tmp_path, *args, name="c.csv")
    assert a == b == c


def test_jsonl_output(tmp_path):
    code, text = run(tmp_path, "sweep", "--alpha", "0.8", "--tau-c", "15,20", "--tau-p", "20",
                     "--format", "jsonl", name="o.jsonl")
    assert code == 0
    recs = [json.loads(l) for l in text.splitlines()]
    assert [r["status"] for r in recs] == ["OK", "INFEASIBLE"]
    assert list(recs[0]) == cli.SWEEP_COLUMNS
    assert recs[1]["lh"] is None


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"alpha": [1.2], "tau_c": [15.0], "tau_p": [25.0], "nodes": 401}))
    code, text = run(tmp_path, "sweep", "--config", str(cfg), "--tau-p", "30")
    assert code == 0
    r = rows(text)[0]
    assert (r["alpha"], r["tau_c"], r["tau_p"]) == ("1.2", "15", "30")


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert cli.main(["sweep", "--config", str(cfg)]) == 2


def test_invalid_temperatures_are_usage_errors(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"Tp": 7.0}))
    assert cli.main(["sweep", "--config", str(cfg)]) == 2


def test_io_error(tmp_path):
    bad = tmp_path / "missing" / "x.csv"
    assert cli.main(["sweep", "--alpha", "0.8", "--tau-c", "15", "--tau-p", "20", "--out", str(bad)]) == 3
    assert cli.main(["sweep", "--config", str(tmp_path / "nope.json")]) == 3


def test_optimize_rows(tmp_path):
    code, text = run(tmp_path, "optimize", "--alpha", "0.8", "--cop-target", "2.0", "--tau-c", "10:40:5")
    assert code == 0
    data = rows(text)
    assert len(data) == 7
    for r in data:
        assert r["status"] == "OK"
        assert abs(float(r["eps_check"]) - 2.0) < 1e-8
        tau = float(r["tau_c"]) + float(r["tau_h"]) + float(r["tau_p"])
        assert abs(float(r["residual"])) < 1e-9 * 2 * tau


def test_optimize_above_reversible_cop_is_infeasible(tmp_path):
    code, text = run(tmp_path, "optimize", "--cop-target", "3.0", "--tau-c", "10:40:10")
    assert code == 0
    assert {r["status"] for r in rows(text)} == {"INFEASIBLE"}


def test_optimize_needs_target():
    assert cli.main(["optimize"]) == 2


def test_oracle_check_short_ladder():
    assert cli.main(["oracle-check", "--tau-ladder", "40,80"]) == 2


def test_oracle_check_static(tmp_path):
    code, text = run(tmp_path, "oracle-check", "--static", "--steps", "1000", name="o.txt")
    assert code == 0
    assert "exact" in text and text.rstrip().endswith("PASS")


@pytest.mark.slow
def test_oracle_check_default_params(tmp_path):
    code, text = run(tmp_path, "oracle-check", "--alpha", "0.8", name="o.txt")
    assert code == 0
    assert text.rstrip().endswith("PASS")


def test_oracle_check_integrator_failure(monkeypatch):
    def boom(*a, **k):
        raise IntegratorError("positivity breached")

    monkeypatch.setattr(cli, "perturbation_order_check", boom)
    assert cli.main(["oracle-check"]) == 4


def test_parse_range():
    assert cli.parse_range("10:20:5") == [10.0, 15.0, 20.0]
    assert cli.parse_range("1,2.5") == [1.0, 2.5]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tricycle", "sweep", "--alpha", "0.8",
                          "--tau-c", "15", "--tau-p", "20"], capture_output=True, text=True)
    assert res.returncode == 0
    assert len(res.stdout.splitlines()) == 3
