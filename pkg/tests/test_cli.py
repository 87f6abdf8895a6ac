import io
import json
import subprocess
import sys

import numpy as np
import pytest

from hdlocation.cli import main
from hdlocation.gauss import SigmaModel, sample, write_csv


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


@pytest.fixture
def null_csv(tmp_path):
    path = tmp_path / "null.csv"
    write_csv(path, sample(SigmaModel.identity(5), None, 50, seed=1))
    return path


def _rows(text):
    return {line.split()[0]: line.split() for line in text.splitlines()
            if line.split() and line.split()[0] in ("hotelling", "dempster", "weighted")}


class TestTestCommand:
    def test_smoke(self, null_csv):
        code, text = run(["test", str(null_csv), "--alpha", "0.05"])
        assert code == 0
        rows = _rows(text)
        assert set(rows) == {"hotelling", "dempster", "weighted"}
        assert "rho_hat" in text and "a4_hat" in text and "c_hat = 0.102041" in text

    def test_high_dimension(self, tmp_path):
        path = tmp_path / "wide.csv"
        write_csv(path, sample(SigmaModel.identity(60), None, 50, seed=2))
        code, text = run(["test", str(path)])
        assert code == 0
        rows = _rows(text)
        assert " ".join(rows["hotelling"][1:]) == "undefined (p >= N)"
        assert " ".join(rows["weighted"][1:]) == "undefined (p >= n)"
        assert rows["dempster"][-1] in ("accept", "reject")

    def test_mu0_at_sample_mean(self, null_csv, tmp_path):
        X = np.loadtxt(null_csv, delimiter=",")
        mu0 = ",".join(repr(float(v)) for v in X.mean(axis=0))
        code, text = run(["test", str(null_csv), "--mu0", mu0])
        assert code == 0
        rows = _rows(text)
        assert float(rows["hotelling"][2]) <= 0
        assert float(rows["dempster"][2]) < 0 and float(rows["weighted"][2]) < 0
        assert all(r[-1] == "accept" for r in rows.values())

    def test_mu0_from_file(self, null_csv, tmp_path):
        mu_path = tmp_path / "mu.csv"
        mu_path.write_text("0,0,0,0,0\n")
        assert run(["test", str(null_csv), "--mu0", str(mu_path)])[1] == run(["test", str(null_csv)])[1]

    def test_normal_critical(self, null_csv):
        _, text = run(["test", str(null_csv), "--critical", "normal"])
        assert _rows(text)["weighted"][3] == "1.64485"

    def test_malformed_csv(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3,4\n5,x\n")
        code, _ = run(["test", str(path)])
        assert code == 2
        assert "line 3" in capsys.readouterr().err

    def test_mu0_dimension_mismatch(self, null_csv, capsys):
        code, _ = run(["test", str(null_csv), "--mu0", "1,2"])
        assert code == 2
        assert "p = 5" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["test", str(tmp_path / "nope.csv")])
        assert info.value.code == 2

    def test_bad_alpha(self, null_csv):
        with pytest.raises(SystemExit) as info:
            main(["test", str(null_csv), "--alpha", "1.5"])
        assert info.value.code == 2

    def test_degenerate_data_is_numeric_failure(self, tmp_path, capsys):
        path = tmp_path / "flat.csv"
        write_csv(path, np.ones((12, 3)))
        code, _ = run(["test", str(path), "--mu0", "0"])
        assert code == 3
        assert "numeric error" in capsys.readouterr().err


class TestWeightAndPower:
    def test_weight(self):
        assert run(["weight", "--c", "0.5", "--a1", "1", "--a2", "1"]) == (0, "rho_star = 0.414214\n")

    def test_weight_from_data(self, null_csv):
        code, text = run(["weight", "--data", str(null_csv)])
        assert code == 0 and "rho_star" in text and "a2_hat" in text

    def test_weight_needs_inputs(self):
        assert run(["weight", "--c", "0.5"])[0] == 2

    def test_null_power(self):
        code, text = run(["power", "--c", "0.5", "--a1", "1", "--a2", "1", "--n", "100"])
        assert code == 0
        powers = [l for l in text.splitlines() if l.startswith("power ")]
        assert len(powers) == 3 and all(l.endswith("= 0.05") for l in powers)

    def test_identity_profile_regime(self):
        code, text = run(["power", "--c", "0.5", "--a1", "1", "--a2", "1", "--n", "100",
                          "--delta2", "0.2", "--delta2-I", "0.2"])
        assert code == 0
        assert "regime = DempsterBest" in text
        assert "c1_interval = [1.19891, 1.66818]" in text
        assert "omega0_ratio = 1.41421" in text

    def test_domain_violation(self, capsys):
        assert run(["power", "--c", "1.0", "--a1", "1", "--a2", "1", "--n", "100"])[0] == 2


class TestSimulate:
    def _spec(self, tmp_path, **kw):
        spec = dict(p=6, N_list=[15, 25], etas=[0.2, 0.4], alphas=[0.05], replications=10, seed=3)
        spec.update(kw)
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        return path

    def test_tiny_r(self, tmp_path):
        code, text = run(["simulate", str(self._spec(tmp_path)), "--out", str(tmp_path / "o")])
        assert code == 0
        assert "wall time" in text
        lines = (tmp_path / "o" / "asl_eta0.2_p6.csv").read_text().splitlines()
        assert lines[0] == "eta,p,N,alpha,test,rate,mc_se,rejects,r,seed"
        rates = [float(l.split(",")[5]) for l in lines[1:]]
        assert all(round(r * 10, 9) == int(round(r * 10)) for r in rates)
        assert (tmp_path / "o" / "asl_eta0.4_p6.md").exists()

    def test_power_mode_file_names(self, tmp_path):
        spec = self._spec(tmp_path, mu_mode="flat_shift")
        assert run(["simulate", str(spec), "--out", str(tmp_path / "o")])[0] == 0
        assert (tmp_path / "o" / "power_eta0.2_p6.csv").exists()

    def test_byte_identical(self, tmp_path):
        spec = self._spec(tmp_path, replications=300)
        run(["simulate", str(spec), "--out", str(tmp_path / "a")])
        run(["simulate", str(spec), "--out", str(tmp_path / "b"), "--workers", "2"])
        for name in ("asl_eta0.2_p6.csv", "asl_eta0.4_p6.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_schema_violation(self, tmp_path, capsys):
        spec = self._spec(tmp_path, colour="blue", alphas=[0.05, 2])
        assert run(["simulate", str(spec), "--out", str(tmp_path / "o")])[0] == 2
        err = capsys.readouterr().err
        assert "colour: unknown key" in err

    def test_seed_override_and_env(self, tmp_path, monkeypatch):
        path = tmp_path / "noseed.json"
        path.write_text(json.dumps(dict(p=6, N_list=[15], etas=[0.2], alphas=[0.05], replications=50)))
        monkeypatch.setenv("HDLOCATION_SEED", "77")
        run(["simulate", str(path), "--out", str(tmp_path / "env")])
        assert (tmp_path / "env" / "asl_eta0.2_p6.csv").read_text().splitlines()[1].endswith(",50,77")
        run(["simulate", str(path), "--out", str(tmp_path / "flag"), "--seed", "5"])
        assert (tmp_path / "flag" / "asl_eta0.2_p6.csv").read_text().splitlines()[1].endswith(",50,5")


class TestValidate:
    def test_ok(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(dict(p=6, N_list=[15])))
        code, text = run(["validate", str(path)])
        assert code == 0 and text.startswith("ok:")

    def test_problems(self, tmp_path, capsys):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(dict(p=6, N_list=[15, 4])))
        assert run(["validate", str(path)])[0] == 2
        assert "N_list[1]" in capsys.readouterr().err


def test_console_script(null_csv):
    proc = subprocess.run([sys.executable, "-m", "hdlocation.cli", "test", str(null_csv)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "dempster" in proc.stdout
