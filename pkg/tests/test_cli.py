from __future__ import annotations

import csv
import io
import json

import pytest

from density_lab import covering
from density_lab.cli import main
from density_lab.exact import floor_q


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestDensity:
    def test_json(self, capsys):
        code, out, _ = run(capsys, "density", "--seq", "arith:1", "--t", "10000", "--sampling", "both")
        assert code == 0
        payload = json.loads(out)
        assert set(payload["reports"]) == {"integer", "real"}
        p_hat = payload["reports"]["integer"]["estimate_decimal"]
        assert abs(float(p_hat) - 1) < 0.01
        assert "integer_real_gap" in payload

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "density", "--seq", "arith:3", "--t", "5000", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 3
        assert {r["sampling"] for r in rows} == {"real"}

    def test_file_input(self, capsys, tmp_path):
        path = tmp_path / "seq.txt"
        path.write_text("\n".join(str(2 * n) for n in range(1, 6001)), encoding="utf-8")
        code, out, _ = run(capsys, "density", "--file", str(path), "--t0", "100", "--t", "12000", "--sampling", "integer")
        assert code == 0
        assert abs(float(json.loads(out)["reports"]["integer"]["estimate_decimal"]) - 0.5) < 0.02

    def test_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            assert run(capsys, "density", "--seq", "blocks", "--t", "20000", "--out", str(path))[0] == 0
        assert a.read_bytes() == b.read_bytes()


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["density", "--seq", "arith:0"],
            ["density", "--seq", "poly:0,1/2,1"],
            ["density", "--seq", "arith:1", "--file", "x"],
            ["density", "--seq", "arith:1", "--t0", "10", "--t", "5"],
            ["density", "--seq", "primes:100", "--t", "1000"],
            ["covering", "--x", "100", "--xi", "1/2", "--eta", "1/2"],
            ["certify", "--seq", "arith:1", "--class", "{oops"],
            ["verify-lemmas", "--trials", "-1"],
        ],
    )
    def test_invalid_input(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "density", "--file", str(tmp_path / "absent.txt"))[0] == 3

    def test_argparse_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["density", "--sampling", "bogus"])
        assert exc.value.code == 2


class TestCovering:
    def test_reference_instance(self, capsys):
        code, out, _ = run(capsys, "covering", "--x", "100", "--xi", "3/10", "--eta", "1/2")
        payload = json.loads(out)
        assert code == 0 and payload["d"] == 1 and payload["all_pass"]

    def test_witness(self, capsys):
        code, out, _ = run(capsys, "covering", "--x", "10000", "--xi", "3/10", "--eta", "9/10", "--seq", "arith:1")
        payload = json.loads(out)
        assert code == 0 and payload["witness"]["bound"] == "7000/7813"

    def test_csv_table(self, capsys):
        code, out, _ = run(capsys, "covering", "--x", "1000", "--xi", "3/10", "--eta", "9/10", "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0 and len(rows) == 1 + 12

    def test_broken_rounding_fails(self, capsys, monkeypatch):
        monkeypatch.setattr(covering, "ceil_q", floor_q)
        code, _, err = run(capsys, "covering", "--x", "1000", "--xi", "3/10", "--eta", "9/10")
        assert code == 1 and "failed" in err


class TestCertify:
    def test_given_family(self, capsys):
        code, out, _ = run(capsys, "certify", "--seq", "arith:1", "--family", "geo:2,2,2", "--rate", "99/100", "--class", "(1,inf]")
        assert code == 0 and json.loads(out)["certificate"]["accepted"]

    def test_extracted_family(self, capsys):
        code, out, _ = run(capsys, "certify", "--seq", "blocks", "--t", "131072")
        payload = json.loads(out)
        assert code == 0 and payload["certificate"]["accepted"]
        assert payload["consistency"]["xi_star"] == "1/2"

    def test_family_file(self, capsys, tmp_path):
        path = tmp_path / "fam.json"
        prefix = [["1", "2"], ["2", "4"], ["4", "8"]]
        path.write_text(json.dumps({"prefix": prefix, "tail": {"kind": "constant", "ratio": "2", "extendable": False}}), encoding="utf-8")
        code, out, _ = run(capsys, "certify", "--seq", "arith:1", "--family", str(path), "--n-terms", "3", "--rate", "1")
        assert code == 0 and json.loads(out)["certificate"]["accepted"]
        # a bare prefix says nothing about substantiality
        path.write_text(json.dumps({"prefix": prefix}), encoding="utf-8")
        code, out, _ = run(capsys, "certify", "--seq", "arith:1", "--family", str(path), "--n-terms", "3", "--rate", "1")
        assert code == 0 and json.loads(out)["certificate"]["reason"] == "substantiality"



class TestVerifyLemmas:
    def test_small_run(self, capsys):
        code, out, _ = run(capsys, "verify-lemmas", "--trials", "20", "--seed", "3")
        payload = json.loads(out)
        assert code == 0 and payload["total_failures"] == 0

    def test_zero_trials_warns(self, capsys):
        code, out, err = run(capsys, "verify-lemmas", "--trials", "0")
        assert code == 0 and "WARNING" in err
        assert json.loads(out)["total_cases"] == 0

    def test_mutation_exit_one(self, capsys, monkeypatch):
        monkeypatch.setattr(covering, "ceil_q", floor_q)
        assert run(capsys, "verify-lemmas", "--trials", "50", "--suite", "covering")[0] == 1
