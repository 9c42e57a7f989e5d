import csv
import io
import json
import math
import subprocess
import sys

import pytest

from proplab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def error_of(err):
    return json.loads(err.strip().splitlines()[-1])["error"]


class TestEval:
    def test_quarter_period(self, capsys):
        code, out, _ = run(capsys, "eval", "--m", "1", "--omega", "1", "--hbar", "1", "--x2", "0", "--x1", "0", "--tau", "1.5707963")
        assert code == 0
        report = json.loads(out)
        value = report["results"]["value"]
        assert value["re"] == pytest.approx(0.2820948, abs=1e-7)
        assert value["im"] == pytest.approx(-0.2820948, abs=1e-7)
        assert report["results"]["abs"] == pytest.approx(math.hypot(value["re"], value["im"]))
        assert report["results"]["phase"] == pytest.approx(-math.pi / 4, abs=1e-7)

    def test_euclidean(self, capsys):
        code, out, _ = run(capsys, "eval", "--euclidean", "--beta", "1", "--x2", "0", "--x1", "0")
        assert code == 0
        assert json.loads(out)["results"]["value"] == pytest.approx(math.sqrt(1 / (2 * math.pi * math.sinh(1))), rel=1e-14)

    def test_free_particle(self, capsys):
        code, out, _ = run(capsys, "eval", "--omega", "0", "--tau", "1")
        assert code == 0 and json.loads(out)["results"]["kernel"] == "free"

    @pytest.mark.parametrize("tau", ["0", "-1"])
    def test_bad_tau(self, capsys, tau):
        code, out, err = run(capsys, "eval", "--tau", tau)
        assert code == 2 and out == ""
        assert error_of(err)["class"] == "query"

    def test_caustic(self, capsys):
        code, _, err = run(capsys, "eval", "--tau", str(math.pi))
        assert code == 2 and error_of(err)["class"] == "caustic"

    def test_missing_tau(self, capsys):
        code, _, err = run(capsys, "eval")
        assert code == 2 and error_of(err)["class"] == "usage"

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "eval", "--tau", "1", "--format", "csv")
        rows = dict(csv.reader(io.StringIO(out)))
        assert code == 0 and rows["key"] == "value" and "value.re" in rows

    def test_keys_sorted(self, capsys):
        _, out, _ = run(capsys, "eval", "--tau", "1")
        report = json.loads(out)
        assert list(report) == sorted(report)

    def test_deterministic(self, capsys):
        a = run(capsys, "eval", "--tau", "0.7", "--x2", "0.3", "--epsilon", "1e-3")[1]
        b = run(capsys, "eval", "--tau", "0.7", "--x2", "0.3", "--epsilon", "1e-3")[1]
        assert a == b


class TestVerify:
    def test_only_single_item(self, capsys):
        code, out, _ = run(capsys, "verify", "--only", "kernel.schrodinger")
        report = json.loads(out)
        assert code == 0 and report["pass"] is True
        assert [e["name"] for e in report["residuals"]] == ["kernel.schrodinger"]

    def test_only_bch_fails_and_is_named(self, capsys):
        code, out, err = run(capsys, "verify", "--only", "fock.bch")
        assert code == 1
        assert json.loads(out)["failed"] == ["fock.bch"]
        assert "FAIL fock.bch" in err

    def test_default_suite(self, capsys):
        code, out, _ = run(capsys, "verify")
        report = json.loads(out)
        assert len(report["residuals"]) >= 12
        assert set(report["failed"]) == {"fock.bch", "fock.bch_trend"}
        assert code == 1

    @pytest.mark.xfail(strict=True, reason="the number-basis factorisation items cannot pass")
    def test_default_suite_all_pass(self, capsys):
        assert run(capsys, "verify")[0] == 0

    def test_weaker_truncation_reported_honestly(self, capsys):
        _, out40, _ = run(capsys, "verify", "--only", "fock.bch", "--d", "20", "--D", "40")
        _, out80, _ = run(capsys, "verify", "--only", "fock.bch", "--d", "20", "--D", "80")
        r40 = json.loads(out40)["residuals"][0]["value"]
        r80 = json.loads(out80)["residuals"][0]["value"]
        assert math.isfinite(r40) and math.isfinite(r80)

    @pytest.mark.xfail(strict=True, reason="the number-basis factorisation residual grows with D")
    def test_weaker_truncation_is_worse(self, capsys):
        _, out40, _ = run(capsys, "verify", "--only", "fock.bch", "--d", "20", "--D", "40")
        _, out80, _ = run(capsys, "verify", "--only", "fock.bch", "--d", "20", "--D", "80")
        assert json.loads(out40)["residuals"][0]["value"] > json.loads(out80)["residuals"][0]["value"]

    def test_thresholds_flag(self, capsys, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"kernel.schrodinger": 1e-30}))
        code, _, err = run(capsys, "verify", "--only", "kernel.schrodinger", "--thresholds", str(path))
        assert code == 1 and "FAIL kernel.schrodinger" in err

    def test_thresholds_env(self, capsys, tmp_path, monkeypatch):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"kernel.schrodinger": 1e-30}))
        monkeypatch.setenv("PROPLAB_THRESHOLDS", str(path))
        assert run(capsys, "verify", "--only", "kernel.schrodinger")[0] == 1

    def test_list(self, capsys):
        code, out, _ = run(capsys, "verify", "--list")
        assert code == 0 and "fock.bch\t" in out

    def test_csv(self, capsys):
        _, out, _ = run(capsys, "verify", "--only", "spectral.mehler", "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["name", "value", "threshold", "pass"] and rows[1][0] == "spectral.mehler"

    def test_deterministic(self, capsys):
        args = ("verify", "--only", "kernel.composition", "--only", "spectral.partition_trace")
        assert run(capsys, *args)[1] == run(capsys, *args)[1]

    def test_invalid_truncation(self, capsys):
        code, _, err = run(capsys, "verify", "--D", "30", "--d", "20")
        assert code == 2 and error_of(err)["class"] == "configuration"


class TestSweep:
    def read(self, out):
        rows = list(csv.reader(io.StringIO(out)))
        return rows[0], [(int(a), float(b)) for a, b in rows[1:]]

    def test_terms_geometric(self, capsys):
        code, out, _ = run(capsys, "sweep", "--param", "terms", "--values", "10,20,30,40")
        header, rows = self.read(out)
        assert code == 0 and header == ["param", "residual"]
        r = [v for _, v in rows]
        ratios = [b / a for a, b in zip(r, r[1:])]
        # Z tail ratio per ten terms at the smallest beta is e^{-2.5}
        assert all(q < 0.1 for q in ratios) and max(ratios) / min(ratios) < 1.5

    def test_D_sweep_reported(self, capsys):
        code, out, _ = run(capsys, "sweep", "--param", "D", "--values", "20,40,80")
        _, rows = self.read(out)
        assert code == 0 and [d for d, _ in rows] == [20, 40, 80]

    @pytest.mark.xfail(strict=True, reason="the number-basis factorisation residual grows with D")
    def test_D_sweep_decreasing(self, capsys):
        _, out, _ = run(capsys, "sweep", "--param", "D", "--values", "20,40,80")
        r = [v for _, v in self.read(out)[1]]
        assert r[0] > r[1] > r[2]

    def test_sidecar(self, capsys, tmp_path):
        out = tmp_path / "sweep.csv"
        code, stdout, _ = run(capsys, "sweep", "--param", "quad-order", "--values", "20,40", "--out", str(out))
        assert code == 0 and stdout == ""
        side = json.loads((tmp_path / "sweep.csv.json").read_text())
        assert side["param"] == "quad-order" and side["values"] == [20, 40] and "meta" in side
        assert "created" in side["meta"]

    def test_data_file_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "sweep", "--param", "slices", "--values", "10,100", "--out", str(a))
        run(capsys, "sweep", "--param", "slices", "--values", "10,100", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_json_format(self, capsys):
        _, out, _ = run(capsys, "sweep", "--param", "terms", "--values", "5", "--format", "json")
        assert json.loads(out)["rows"][0][0] == 5

    @pytest.mark.parametrize("values", ["", " , ", "1,x"])
    def test_bad_range(self, capsys, values):
        code, _, err = run(capsys, "sweep", "--param", "D", "--values", values)
        assert code == 2 and error_of(err)["class"] == "sweep"

    def test_unknown_item(self, capsys):
        code, _, err = run(capsys, "sweep", "--param", "D", "--values", "20", "--item", "nope")
        assert code == 2 and error_of(err)["class"] == "sweep"


class TestSpectrum:
    def test_energies(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--n-max", "3")
        levels = json.loads(out)["results"]
        assert code == 0 and [lv["energy"] for lv in levels] == [0.5, 1.5, 2.5]
        assert levels[0]["phi"][0] == pytest.approx(0.751126, abs=1e-6)
        assert levels[1]["phi"][0] == 0.0

    def test_grid_csv(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--n-max", "2", "--grid-n", "5", "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0 and len(rows) == 3 and len(rows[0]) == 2 + 5

    def test_bad_n_max(self, capsys):
        assert run(capsys, "spectrum", "--n-max", "0")[0] == 2


class TestGeneral:
    def test_seedless_rejected(self, capsys):
        code, _, err = run(capsys, "eval", "--tau", "1", "--seedless")
        assert code == 2 and error_of(err)["class"] == "usage"

    def test_unknown_flag(self, capsys):
        code, _, err = run(capsys, "eval", "--tau", "1", "--frobnicate")
        assert code == 2 and error_of(err)["class"] == "usage"

    def test_bad_params(self, capsys):
        code, _, err = run(capsys, "eval", "--tau", "1", "--m", "-1")
        assert code == 2 and error_of(err)["class"] == "usage"

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, err = run(capsys, "eval", "--tau", "1", "--out", str(tmp_path / "no" / "such" / "file"))
        assert code == 2 and error_of(err)["class"] == "io"

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "proplab", "eval", "--tau", "1"], capture_output=True, text=True, check=False
        )
        assert proc.returncode == 0 and json.loads(proc.stdout)["command"] == "eval"
