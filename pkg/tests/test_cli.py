import csv
import json
import math
import subprocess
import sys

import pytest

from gatebound.cli import main, sweep_rows_csv_bytes


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_counterexample_command(tmp_path):
    out = tmp_path / "run"
    assert main(["counterexample", "--n", "1..6", "--g", "1.0", "--output", str(out)]) == 0
    rows = read_csv(out / "result.csv")
    assert len(rows) == 6
    for row in rows:
        assert float(row["failure_probability"]) < 1e-10
    report = json.loads((out / "report.json").read_text())
    assert report["command"] == "counterexample"


def test_squeeze_opt_report_values(tmp_path):
    out = tmp_path / "run"
    assert main(["squeeze-opt", "--epsilon", "1e-4", "--output", str(out)]) == 0
    row = read_csv(out / "result.csv")[0]
    assert abs(float(row["e_min_over_hbar_omega"]) - 200.0) < 1e-6
    assert abs(float(row["r_star"]) - 2.302585) < 1e-5


def test_missing_required_parameter_exits_2_without_artifacts(tmp_path):
    out = tmp_path / "run"
    assert main(["pulse-bound", "--output", str(out)]) == 2
    assert not (out / "result.csv").exists()
    assert not (out / "report.json").exists()


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["no-such-command"])
    assert err.value.code == 2


def test_invalid_epsilon_exits_2(tmp_path):
    out = tmp_path / "run"
    assert main(["squeeze-opt", "--epsilon", "2.0", "--output", str(out)]) == 2


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "command": "squeeze-opt",
        "params": {"epsilon": 0.01, "omega": 2.0},
    }))
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg), "--output", str(out)]) == 0
    row = read_csv(out / "result.csv")[0]
    assert abs(float(row["omega_rad_per_s"]) - 2.0) < 1e-12

    out2 = tmp_path / "run2"
    assert main(["squeeze-opt", "--config", str(cfg), "--omega", "3.0",
                 "--output", str(out2)]) == 0
    row2 = read_csv(out2 / "result.csv")[0]
    assert abs(float(row2["omega_rad_per_s"]) - 3.0) < 1e-12


def test_sweep_bound_column_follows_formula(tmp_path):
    out = tmp_path / "run"
    rc = main(["sweep", "--command", "pulse-bound", "--axis", "epsilon",
               "--values", "0.1,0.03,0.01", "--param", "budget=1",
               "--output", str(out), "--seed", "9"])
    assert rc == 0
    rows = read_csv(out / "result.csv")
    eq_rows = [r for r in rows if r["construction"] == "single-mode-equality"]
    assert len(eq_rows) == 3
    assert [float(r["epsilon_value"]) for r in eq_rows] == [0.1, 0.03, 0.01]
    for row in eq_rows:
        eps = float(row["epsilon_value"])
        mean_omega = float(row["mean_omega_rad_per_s"])
        expected = (math.pi ** 2 / 4.0) * mean_omega / eps
        assert abs(float(row[f"bound_hbar_rad_per_s"]) - expected) < 1e-9 * expected


def test_sweep_parallelism_is_byte_identical():
    base = {"epsilon": 0.02, "budget": 50, "n_modes": 2}
    serial = sweep_rows_csv_bytes("pulse-bound", base, "epsilon", [0.1, 0.05, 0.02, 0.01],
                                  parallelism=1, seed=5)
    threaded = sweep_rows_csv_bytes("pulse-bound", base, "epsilon", [0.1, 0.05, 0.02, 0.01],
                                    parallelism=8, seed=5)
    assert serial == threaded


def test_sweep_failed_point_marks_row_and_exits_3(tmp_path):
    out = tmp_path / "run"
    rc = main(["sweep", "--command", "collision-free", "--axis", "b",
               "--values", "2,100", "--param", "m=40", "--param", "v=2",
               "--param", "duration=8", "--param", "epsilon=0.5",
               "--output", str(out)])
    assert rc == 3
    rows = read_csv(out / "result.csv")
    assert rows[0]["status"] == "ok"
    assert rows[1]["status"].startswith("error:")


def test_identical_runs_are_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["pulse-bound", "--epsilon", "0.05", "--budget", "150",
                     "--seed", "21", "--output", str(out)]) == 0
    assert (out1 / "result.csv").read_bytes() == (out2 / "result.csv").read_bytes()
    report1 = json.loads((out1 / "report.json").read_text())
    report2 = json.loads((out2 / "report.json").read_text())
    assert report1 == report2


def test_plot_artifact_written(tmp_path):
    out = tmp_path / "run"
    assert main(["counterexample", "--n", "1,2,3", "--output", str(out), "--plot"]) == 0
    svg = (out / "plot.svg").read_text()
    assert svg.startswith("<svg")
    assert "failure_probability" in svg


def test_si_units_scale_energy(tmp_path):
    out = tmp_path / "run"
    assert main(["squeeze-opt", "--epsilon", "1e-4", "--units", "si",
                 "--output", str(out)]) == 0
    row = read_csv(out / "result.csv")[0]
    hbar = 1.054571817e-34
    assert abs(float(row["e_min_J"]) - 200.0 * hbar) < 1e-6 * 200.0 * hbar
    assert abs(float(row["e_min_over_hbar_omega"]) - 200.0) < 1e-6


def test_verify_all_subset_and_row_count(tmp_path):
    out = tmp_path / "run"
    assert main(["verify-all", "--criteria", "1,5,6,9", "--output", str(out)]) == 0
    rows = read_csv(out / "verification.csv")
    assert len(rows) == 4
    assert all(row["passed"] == "true" for row in rows)


def test_verify_all_tightened_tolerance_fails_controlled(tmp_path):
    out = tmp_path / "run"
    rc = main(["verify-all", "--criteria", "6", "--tolerance-scale", "1e-12",
               "--output", str(out)])
    assert rc == 3
    rows = read_csv(out / "verification.csv")
    assert rows[0]["passed"] == "false"


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "gatebound.cli", "squeeze-opt", "--epsilon", "0.01",
         "--output", "/tmp/gatebound-entry-test"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
