import csv
import json
from pathlib import Path

import numpy as np
import pytest

from qconsensus import cli

from conftest import example_a_doc

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


def write_doc(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_check_exit_codes(tmp_path, capsys):
    result = cli.cmd_check(str(SCENARIO_DIR / "example_a.json"), str(tmp_path))
    # the realized attack exceeds the consensus ceiling, hence exit 1
    assert result.exit_code == 1
    payload = json.loads((tmp_path / "conditions.json").read_text())
    assert payload["bound_45"] == pytest.approx(0.3257, abs=1e-4)
    assert payload["verdicts"]["quantizer_range"]["pass"] is True
    out = capsys.readouterr().out
    assert "dos_level" in out and "FAIL" in out


def test_check_all_pass_exits_zero(tmp_path):
    doc = example_a_doc(dos=None)
    doc["quantizer"] = {"levels": 100_000, "step": 1.0}
    result = cli.cmd_check(write_doc(tmp_path, doc), str(tmp_path))
    assert result.exit_code == 0


def test_check_garbage_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{{{")
    assert cli.cmd_check(str(bad), str(tmp_path)).exit_code == 2
    doc = example_a_doc()
    doc["zoom"]["gamma1"] = 3.0
    assert cli.cmd_check(write_doc(tmp_path, doc), str(tmp_path)).exit_code == 2


def test_check_scalar_echoes_derived_factor(tmp_path):
    cli.cmd_check(str(SCENARIO_DIR / "example_scalar.json"), str(tmp_path))
    payload = json.loads((tmp_path / "conditions.json").read_text())
    assert payload["gamma2"] == pytest.approx(1.0962, abs=1e-4)
    assert payload["bound_69"] == pytest.approx(0.8134, abs=1e-4)


def test_simulate_artifacts_and_determinism(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for out in (out1, out2):
        result = cli.cmd_simulate(str(SCENARIO_DIR / "example_a.json"), str(out),
                                  plot=True)
        assert result.exit_code == 0
        for name in ("trace.csv", "conditions.json", "summary.json",
                     "delta.svg", "theta.svg", "symbols.svg"):
            assert (out / name).exists(), name
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()
    summary = json.loads((out1 / "summary.json").read_text())
    assert summary["saturation_count"] == 0
    assert summary["realized_dos"]["transitions"] == 15
    assert summary["resolved_config"]["zoom"]["theta0"] == 1.0


def test_simulate_theta_ratio_pattern_from_csv(tmp_path):
    out = tmp_path / "run"
    cli.cmd_simulate(str(SCENARIO_DIR / "example_a.json"), str(out))
    with open(out / "trace.csv") as fh:
        rows = list(csv.DictReader(fh))
    g1, g2 = 0.85, 1.4
    for prev, cur in zip(rows, rows[1:]):
        ratio = float(cur["theta"]) / float(prev["theta"])
        target = g2 if cur["jammed"] == "1" else g1
        assert ratio == pytest.approx(target, rel=1e-12)


def test_simulate_strict_mode_exit_one(tmp_path):
    doc = example_a_doc()
    doc["quantizer"] = {"levels": 1, "step": 1e-9}
    result = cli.cmd_simulate(write_doc(tmp_path, doc), str(tmp_path / "o"),
                              strict=True)
    assert result.exit_code == 1


def test_scalar_delta_moves_with_jamming(tmp_path):
    out = tmp_path / "sc"
    result = cli.cmd_simulate(str(SCENARIO_DIR / "example_scalar.json"), str(out))
    assert result.exit_code == 0
    with open(out / "trace.csv") as fh:
        rows = list(csv.DictReader(fh))
    deltas = np.array([[float(r[f"delta_{i}_1"]) for i in range(1, 5)] for r in rows])
    jammed = np.array([r["jammed"] == "1" for r in rows])
    norms = np.linalg.norm(deltas, axis=1)
    # long jammed stretches grow the disagreement, clean stretches shrink it
    grow = [norms[k] / norms[k - 1] for k in range(2, len(rows)) if jammed[k]]
    shrink = [norms[k] / norms[k - 1] for k in range(2, len(rows))
              if not jammed[k] and not jammed[k - 1]]
    assert np.median(grow) > 1.0
    assert np.median(shrink) < 1.0
    assert norms[-1] <= 0.05 * norms[0]


def test_sweep_unknown_axis_and_empty_values(tmp_path):
    path = str(SCENARIO_DIR / "example_a.json")
    assert cli.cmd_sweep(path, "nope", [1.0], str(tmp_path)).exit_code == 2
    assert cli.cmd_sweep(path, "duty", [], str(tmp_path)).exit_code == 2


def test_sweep_levels_saturation_pattern(tmp_path):
    doc = example_a_doc()
    doc["quantizer"] = {"levels": 4435, "step": 1.0}
    path = write_doc(tmp_path, doc)
    result = cli.cmd_sweep(path, "levels", [1.0, 2.0, 4435.0],
                           str(tmp_path / "sw"), jobs=1)
    assert result.exit_code == 0
    with open(tmp_path / "sw" / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    sat = [int(r["saturation_count"]) for r in rows]
    assert sat[0] > 0 and sat[2] == 0  # coarse range saturates, shipped one not


def test_sweep_duty_rows_written(tmp_path):
    path = str(SCENARIO_DIR / "example_a.json")
    result = cli.cmd_sweep(path, "duty", [0.1, 0.5], str(tmp_path / "sw"), jobs=2)
    assert result.exit_code == 0
    with open(tmp_path / "sw" / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    finals = [float(r["final_delta_norm"]) for r in rows]
    assert finals[0] < finals[1]  # heavier jamming leaves more disagreement


def test_sweep_needs_generator_for_duty(tmp_path):
    doc = example_a_doc(dos=None)
    assert cli.cmd_sweep(write_doc(tmp_path, doc), "duty", [0.2],
                         str(tmp_path)).exit_code == 2


def test_repro_example_a(tmp_path, capsys):
    result = cli.cmd_repro("example-a", str(tmp_path / "ra"))
    out = capsys.readouterr().out
    assert result.exit_code == 0, out
    assert "PASS" in out
    assert (tmp_path / "ra" / "trace.csv").exists()


def test_repro_example_scalar(tmp_path, capsys):
    result = cli.cmd_repro("example-scalar", str(tmp_path / "rs"))
    out = capsys.readouterr().out
    assert result.exit_code == 0, out


def test_repro_example_scalar_unquantized(tmp_path, capsys):
    result = cli.cmd_repro("example-scalar-unquantized", str(tmp_path / "ru"))
    out = capsys.readouterr().out
    assert result.exit_code == 0, out


def test_repro_unknown_name(tmp_path):
    assert cli.cmd_repro("example-z", str(tmp_path)).exit_code == 2


def test_main_entry(tmp_path):
    rc = cli.main(["check", str(SCENARIO_DIR / "example_scalar.json"),
                   "--out", str(tmp_path)])
    assert rc in (0, 1)
    rc = cli.main(["sweep", str(SCENARIO_DIR / "example_a.json"),
                   "--axis", "duty", "--values", "oops", "--out", str(tmp_path)])
    assert rc == 2


def test_check_writes_only_condition_artifact(tmp_path):
    result = cli.cmd_check(str(SCENARIO_DIR / "example_a.json"), str(tmp_path / "c"))
    assert [Path(p).name for p in result.artifacts_written] == ["conditions.json"]
    assert not (tmp_path / "c" / "trace.csv").exists()


def test_sweep_levels_strict_aborts_small_range(tmp_path):
    doc = example_a_doc()
    path = write_doc(tmp_path, doc)
    result = cli.cmd_sweep(path, "levels", [1.0, 4.0, 4435.0],
                           str(tmp_path / "sws"), jobs=1, strict=True)
    assert result.exit_code == 0
    with open(tmp_path / "sws" / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    # strict runs abort on overflow (sentinel -1); the shipped range survives
    assert int(rows[0]["saturation_count"]) == -1
    assert int(rows[2]["saturation_count"]) == 0


def test_zero_dos_geometric_envelope(tmp_path):
    doc = example_a_doc(dos=None)
    out = tmp_path / "clean"
    result = cli.cmd_simulate(write_doc(tmp_path, doc), str(out))
    assert result.exit_code == 0
    with open(out / "trace.csv") as fh:
        rows = list(csv.DictReader(fh))
    deltas = np.array([[float(r[f"delta_{i}_{d}"]) for i in range(1, 5)
                        for d in (1, 2)] for r in rows])
    norms = np.linalg.norm(deltas, axis=1)
    k = np.arange(len(norms))
    assert np.all(norms <= 4.0 * norms[0] * 0.9**k)
    assert norms[-1] <= 1e-4 * norms[0]
