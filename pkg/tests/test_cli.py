import csv
import io
import json
import math

import pytest

from lsicert.cli import CSV_HEADER, main

WEAK = """schema_version = 1

[model]
type = "gaussian"
precision = [
  [1.0, 0.25],
  [0.25, 1.0],
]

[run]
seed = 7
samples = 1000
trials = 30
"""


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


class TestCommands:
    def test_certify_independent(self, tmp_path, capsys):
        cfg = write(tmp_path, WEAK.replace("0.25", "0.0"))
        code, doc = run_json(capsys, ["certify", "--config", cfg])
        assert code == 0
        assert doc["results"]["bound"]["delta"] == 1.0
        assert doc["results"]["bound"]["t1_constant"] == 2.0
        assert set(doc) == {"schema_version", "config_echo", "seed", "results", "flags", "runtime_ms"}
        assert doc["runtime_ms"] is None

    def test_certify_refused(self, tmp_path, capsys):
        cfg = write(tmp_path, WEAK.replace("0.25", "0.6"))
        code, doc = run_json(capsys, ["certify", "--config", cfg])
        assert code == 2
        assert doc["results"]["delta"] == pytest.approx(-0.2)
        assert doc["flags"]["certified"] is False

    def test_check_conditions(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["check-conditions", "--config", write(tmp_path, WEAK)])
        assert code == 0
        cond = doc["results"]["conditions"]
        assert cond["delta"] == pytest.approx(0.5)
        assert cond["sq"]["passed"] and len(cond["sq"]["witness"]) == 5

    def test_verify_theorem1_deterministic(self, tmp_path, capsys):
        cfg = write(tmp_path, WEAK)
        out = tmp_path / "report.json"
        argv = ["verify-theorem1", "--config", cfg, "--samples", "1000", "--seed", "7", "--out", str(out)]
        assert main(argv) == 0
        first = out.read_bytes()
        assert main(argv) == 0
        assert out.read_bytes() == first
        doc = json.loads(first)
        assert doc["flags"]["holds_all"] and doc["results"]["min_ratio"] >= 1 - 1e-9

    def test_verify_theorem1_refusals(self, tmp_path, capsys):
        cfg = write(tmp_path, WEAK.replace("0.25", "0.6"))
        for extra in ([], ["--unchecked"]):
            code, doc = run_json(capsys, ["verify-theorem1", "--config", cfg, *extra])
            assert code == 2 and doc["results"]["refusal"]["code"] == "DELTA_OUT_OF_RANGE"

    def test_verify_theorem1_unchecked(self, tmp_path, capsys):
        # weak coupling on a two-point grid: delta > 0 but the CO check fails
        text = (
            'schema_version = 1\n[model]\ntype = "grid"\ngrids = [[-1.0, 1.0], [-1.0, 1.0]]\n'
            'hamiltonian = "0.02*x1*x2 + 0.5*(x1^2 + x2^2)"\n[run]\nseed = 0\ntrials = 20\nexhaustive = true\n'
        )
        cfg = write(tmp_path, text)
        code, doc = run_json(capsys, ["verify-theorem1", "--config", cfg])
        assert code == 2 and doc["results"]["refusal"]["code"] == "NOT_CERTIFIED"
        assert doc["results"]["delta"] > 0
        code, doc = run_json(capsys, ["verify-theorem1", "--config", cfg, "--unchecked"])
        assert code == 0 and doc["flags"]["unchecked"] is True and doc["results"]["trials"] == 20

    def test_simulate_gibbs(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["simulate-gibbs", "--config", write(tmp_path, WEAK), "--sweeps", "100"])
        assert code == 0
        assert doc["flags"]["monotone"] and doc["flags"]["telescoping_ok"] and doc["flags"]["converged"]

    def test_pathological(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["pathological", "--config", write(tmp_path, WEAK)])
        assert code == 0
        assert doc["flags"] == {"refused_all": True, "lambda_min_one": True}
        assert [c["n"] for c in doc["results"]["cases"]] == [2, 5, 10]

    def test_timing_flag(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["certify", "--config", write(tmp_path, WEAK), "--timing"])
        assert code == 0 and doc["runtime_ms"] >= 0


class TestSweepDelta:
    def test_csv_rows(self, tmp_path, capsys):
        text = WEAK.replace("0.25", "0.0") + "\n[sweep]\nmultipliers = [0.5, 0.0, 0.25]\n"
        code = main(["sweep-delta", "--config", write(tmp_path, text), "--format", "csv"])
        out = capsys.readouterr().out
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert tuple(rows[0]) == CSV_HEADER
        body = {float(r[0]): r for r in rows[1:]}
        assert [float(r[0]) for r in rows[1:]] == [0.0, 0.25, 0.5]
        assert float(body[0.0][1]) == 1.0 and float(body[0.0][2]) == 2.0 and float(body[0.0][3]) == 0.0
        assert float(body[0.25][1]) == pytest.approx(0.5)
        assert float(body[0.25][2]) == pytest.approx(8 / 3)
        assert float(body[0.25][3]) == pytest.approx(0.377964, abs=5e-7)
        assert float(body[0.5][1]) == pytest.approx(0.0, abs=1e-15) and body[0.5][5] == "false"

    def test_monotone_columns(self, tmp_path, capsys):
        text = WEAK + "\n[sweep]\nstart = 0.0\nstop = 0.45\nsteps = 10\n"
        code, doc = run_json(capsys, ["sweep-delta", "--config", write(tmp_path, text)])
        assert code == 0
        rows = doc["results"]["rows"]
        deltas = [r["delta"] for r in rows]
        consts = [r["t1_constant"] for r in rows]
        assert all(a > b for a, b in zip(deltas, deltas[1:]))
        assert all(a < b for a, b in zip(consts, consts[1:]))

    def test_csv_unavailable_elsewhere(self, tmp_path, capsys):
        assert main(["certify", "--config", write(tmp_path, WEAK), "--format", "csv"]) == 1


class TestErrors:
    def test_unknown_key_exit(self, tmp_path, capsys):
        cfg = write(tmp_path, WEAK.replace("precision", "presicion"))
        assert main(["certify", "--config", cfg]) == 1
        err = capsys.readouterr().err
        assert f"{cfg}:5:1:" in err and "UNKNOWN_KEY" in err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["certify", "--config", str(tmp_path / "none.toml")]) == 1
        assert "IO_ERROR" in capsys.readouterr().err

    def test_model_error_code(self, tmp_path, capsys):
        cfg = write(tmp_path, WEAK.replace("[0.25, 1.0]", "[0.3, 1.0]"))
        assert main(["certify", "--config", cfg]) == 1
        assert "NOT_SYMMETRIC" in capsys.readouterr().err

    def test_nonfinite_values_are_strings(self, tmp_path, capsys):
        text = WEAK + "\n[sweep]\nmultipliers = [0.6]\n"
        code, doc = run_json(capsys, ["sweep-delta", "--config", write(tmp_path, text)])
        row = doc["results"]["rows"][0]
        assert row["t1_constant"] == "nan" and not math.isnan(row["delta"])
