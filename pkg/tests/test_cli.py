import csv
import io
import json
import math
import subprocess
import sys

import pytest

from postchsh.cli import main
from postchsh.coincidence import load_counts, save_counts
from postchsh.pipeline import sampled_table


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestExact:
    def test_defaults_json(self, capsys):
        code, out, _ = run(capsys, "exact", "--format", "json")
        rep = json.loads(out)
        assert code == 0
        assert rep["chsh_value"] == pytest.approx(4.0, abs=1e-12)
        assert rep["ch_value"] == pytest.approx(0.5, abs=1e-12)
        assert rep["bounds"]["chsh"] == {"lhv": 2.0, "cirelson": 2 * math.sqrt(2), "max": 4.0}

    def test_text_is_deterministic(self, capsys):
        _, a, _ = run(capsys, "exact")
        _, b, _ = run(capsys, "exact")
        assert a == b and "CHSH" in a

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "exact", "--format", "csv", "--visibility", "0.5")
        rows = {r[0]: r for r in csv.reader(io.StringIO(out))}
        assert float(rows["ch"][1]) == pytest.approx(0.125, abs=1e-12)

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        code, out, _ = run(capsys, "exact", "--format", "json", "--out", str(path))
        assert code == 0 and out == ""
        assert json.loads(path.read_text())["chsh_value"] == pytest.approx(4.0)


class TestSample:
    def test_reproducible_files(self, capsys, tmp_path):
        paths = []
        for i in range(2):
            c, r = tmp_path / f"c{i}.txt", tmp_path / f"r{i}.json"
            code, _, _ = run(capsys, "sample", "--shots", "5000", "--seed", "42", "--visibility", "0.8",
                             "--format", "json", "--counts-out", str(c), "--out", str(r))
            assert code == 0
            paths.append((c.read_bytes(), r.read_bytes()))
        assert paths[0] == paths[1]

    def test_shots_one_is_degenerate(self, capsys):
        code, out, _ = run(capsys, "sample", "--shots", "1", "--seed", "2", "--format", "json")
        assert code == 0
        rep = json.loads(out)
        for c in rep["terms"]["correlations"].values():
            assert c["degenerate"] is True and c["standard_error"] is None
        assert rep["chsh_standard_error"] is None

    def test_shots_one_text(self, capsys):
        code, out, _ = run(capsys, "sample", "--shots", "1", "--seed", "2")
        assert code == 0 and "n/a" in out

    def test_counts_in(self, capsys, tmp_path):
        table = sampled_table(visibility=0.6, shots=3000, seed=9)
        path = tmp_path / "in.txt"
        save_counts(table, path)
        code, out, _ = run(capsys, "sample", "--counts-in", str(path), "--format", "json")
        assert code == 0
        rep = json.loads(out)
        code, out2, _ = run(capsys, "sample", "--visibility", "0.6", "--shots", "3000", "--seed", "9",
                            "--format", "json")
        rep2 = json.loads(out2)
        assert rep["chsh_value"] == rep2["chsh_value"]
        assert rep["ch_value"] == rep2["ch_value"]
        assert rep["shots"] == {s: 3000 for s in ("ZZZ", "ZXX", "XZX", "XXZ", "XXX")}

    def test_counts_out_matches_table(self, capsys, tmp_path):
        path = tmp_path / "c.txt"
        run(capsys, "sample", "--shots", "700", "--seed", "4", "--counts-out", str(path))
        assert load_counts(path) == sampled_table(shots=700, seed=4)


class TestSweep:
    def test_csv(self, capsys):
        code, out, _ = run(capsys, "sweep", "--param", "visibility", "--from", "0", "--to", "1", "--steps", "11")
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["param", "value", "chsh", "ch", "bound_lhv", "bound_cirelson", "bound_max"]
        assert len(rows) == 12
        assert float(rows[1][3]) == pytest.approx(-0.25) and float(rows[-1][3]) == pytest.approx(0.5)

    def test_json(self, capsys):
        code, out, _ = run(capsys, "sweep", "--steps", "3", "--format", "json")
        assert [r["value"] for r in json.loads(out)] == [0.0, 0.5, 1.0]


class TestBoundCommands:
    def test_lhv(self, capsys):
        code, out, _ = run(capsys, "lhv")
        lines = out.splitlines()
        assert code == 0 and lines[0] == "2"
        assert sum(1 for l in lines if l.strip().startswith(("+1", "-1"))) == 8

    def test_lhv_json(self, capsys):
        _, out, _ = run(capsys, "lhv", "--format", "json")
        rep = json.loads(out)
        assert rep["lhv_max"] == 2 and all(s["max_abs"] == 2 for s in rep["per_sign"])

    def test_cirelson_canonical(self, capsys):
        _, out, _ = run(capsys, "cirelson", "--format", "json")
        assert json.loads(out)["norm"] == pytest.approx(2 * math.sqrt(2), abs=1e-9)

    def test_cirelson_angles(self, capsys):
        q = math.pi / 4
        _, out, _ = run(capsys, "cirelson", "--format", "json", "--angles",
                        "0", "0", str(2 * q), "0", str(q), "0", str(-q), "0")
        assert json.loads(out)["norm"] == pytest.approx(2 * math.sqrt(2), abs=1e-9)

    def test_cirelson_random(self, capsys):
        _, out, _ = run(capsys, "cirelson", "--random", "1000", "--format", "json")
        r = json.loads(out)["random"]
        assert r["max"] <= 2 * math.sqrt(2) + 1e-9 and r["all_within_bound"]


class TestErrors:
    @pytest.mark.parametrize("argv", [
        ["exact", "--visibility", "1.5"],
        ["exact", "--strategy", "fixed:7"],
        ["sample", "--shots", "0"],
        ["cirelson", "--angles", "0", "1"],
        ["cirelson", "--angles", "0", "0", "x", "0", "0", "0", "0", "0"],
        ["sweep", "--steps", "1"],
        ["sample", "--counts-in", "/nonexistent/counts.txt"],
        ["frobnicate"],
    ])
    def test_machine_readable(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code != 0
        payload = json.loads(err.strip().splitlines()[-1])
        assert {"error", "message"} <= set(payload)

    def test_malformed_counts(self, capsys, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("ZZZ 1 1 1 4\nZXX -1 0 1 5\n")
        code, _, err = run(capsys, "sample", "--counts-in", str(path))
        payload = json.loads(err)
        assert code == 2 and "line 2" in payload["message"]

    def test_fixed_strategy_without_rule(self, capsys):
        code, _, err = run(capsys, "exact", "--strategy", "fixed:0")
        assert code == 2 and json.loads(err)["error"] == "ValueError"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "postchsh", "exact", "--format", "json"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["chsh_value"] == pytest.approx(4.0)
