import json
import math
import subprocess
import sys

import pytest

from lipwidth.approximation import PCExpansion
from lipwidth.cli import main
from lipwidth.spectrum import Algebraic, make_spectrum


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_rows(capsys):
    code, out, _ = run(capsys, "spectrum", "--family", "alg:alpha=2", "--b", "ones", "--dim-cap", "5")
    rows = out.splitlines()
    assert code == 0 and len(rows) == 6
    assert float(rows[3].split(",")[3]) == pytest.approx(1 / 9, rel=1e-15)


def test_spectrum_sqrt_lambda(capsys):
    code, out, _ = run(capsys, "spectrum", "--family", "exp:alpha=1,beta=1", "--b", "sqrt-lambda", "--dim-cap", "4")
    assert code == 0
    assert all(float(r.split(",")[3]) == pytest.approx(1.0) for r in out.splitlines()[1:])


def test_spectrum_non_monotone_file(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("[1, 2]")
    code, _, err = run(capsys, "spectrum", "--family", f"file:{f}")
    assert code == 2 and "NonMonotone" in err


def test_spectrum_validation_failure(capsys):
    code, _, err = run(capsys, "spectrum", "--family", "alg:alpha=2", "--codomain-infinite")
    assert code == 2 and "square-summable" in err


def test_spectrum_file_and_b_file(capsys, tmp_path):
    lam = tmp_path / "lam.csv"
    lam.write_text("1\n0.5\n0.25\n")
    b = tmp_path / "b.csv"
    b.write_text("1\n1\n0.8\n")
    code, out, _ = run(capsys, "spectrum", "--family", f"file:{lam}", "--b", f"file:{b}", "--format", "json")
    obj = json.loads(out)
    assert code == 0 and obj["schema"] == "lipwidth/1"
    assert [r["lambda_b"] for r in obj["rows"]] == pytest.approx([1, 0.5, 0.25 / 0.64])
    b.write_text("1\n1\n0.5\n")
    assert run(capsys, "spectrum", "--family", f"file:{lam}", "--b", f"file:{b}")[0] == 2


def test_bad_family_usage(capsys):
    assert run(capsys, "spectrum", "--family", "zeta:alpha=2")[0] == 2
    assert run(capsys, "spectrum", "--family", "alg:beta=2")[0] == 2
    assert run(capsys, "nosuchcommand")[0] == 2


def test_enumerate_csv_deterministic(capsys):
    a = run(capsys, "enumerate", "--family", "exp:alpha=1,beta=1", "--count", "50")[1]
    b = run(capsys, "enumerate", "--family", "exp:alpha=1,beta=1", "--count", "50")[1]
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "rank,cost,weight,index" and len(lines) == 51
    assert lines[1] == "1,0,1,0"


def test_width_curve_geometric(capsys):
    code, out, _ = run(capsys, "width-curve", "--family", "alg:alpha=2", "--m-max", "4096")
    rows = [r.split(",") for r in out.splitlines()[1:]]
    assert code == 0 and len(rows) == 13
    theta = [float(r[1]) for r in rows]
    assert all(a >= b for a, b in zip(theta, theta[1:]))
    code, out, _ = run(capsys, "width-curve", "--m-max", "10", "--grid", "linear", "--format", "json")
    assert json.loads(out)["m"] == list(range(1, 11))


def test_verify_reports_holds_from(capsys):
    code, out, _ = run(capsys, "verify", "--theorem", "lower", "--p", "2", "--k-max", "20000")
    obj = json.loads(out)
    assert code == 0 and obj["status"] == "holds-from" and obj["holds_from"] >= 1
    code, out, _ = run(capsys, "verify", "--theorem", "4.3", "--p", "2", "--k-max", "20000")
    assert json.loads(out)["holds_from"] == obj["holds_from"]


def test_verify_upper_and_sharp(capsys):
    code, out, _ = run(capsys, "verify", "--family", "exp:alpha=1,beta=1", "--theorem", "upper-exponential", "--k-max", "5000")
    assert json.loads(out)["status"] == "holds-from"
    code, out, _ = run(capsys, "verify", "--family", "alg:alpha=2", "--theorem", "upper-algebraic", "--k-max", "5000")
    obj = json.loads(out)
    assert obj["params"]["eta"] > 0 and obj["eta_calibration_window"] == [50, 500]
    code, out, _ = run(capsys, "verify", "--family", "exp:alpha=1,beta=1", "--theorem", "sharp-exp", "--k-max", "5000")
    assert code == 0
    assert run(capsys, "verify", "--theorem", "9.9")[0] == 2
    assert run(capsys, "verify", "--family", "exp:alpha=1,beta=1", "--theorem", "sharp-exp", "--delta", "1")[0] == 2


def test_stesin(capsys, tmp_path):
    w = tmp_path / "w.txt"
    w.write_text("2\n1\n")
    code, out, _ = run(capsys, "stesin", "--weights", str(w), "--p", "4", "--q", "2", "--m", "1")
    assert code == 0 and float(out.splitlines()[1]) == pytest.approx(1.0)
    code, out, _ = run(capsys, "stesin", "--weights", str(w), "--p", "inf", "--m", "0", "--format", "json")
    assert json.loads(out)["value"] == pytest.approx(math.sqrt(5))
    assert run(capsys, "stesin", "--weights", str(w), "--p", "2", "--q", "2", "--m", "0")[0] == 2


def test_approximate_finite_pc(capsys, tmp_path):
    s = make_spectrum(Algebraic(2))
    E = PCExpansion.from_terms({"0": [1.0], "1:1": [0.5], "2:1": [0.25]}, s)
    f = tmp_path / "ex.json"
    f.write_text(E.to_json())
    code, out, _ = run(capsys, "approximate", "--operator", f"finite-pc:{f}", "--s", "0")
    obj = json.loads(out)
    assert code == 0 and obj["error"] == pytest.approx(math.sqrt(E.norm_sq()))
    assert obj["u_bound"] == 1.0
    code, out, _ = run(capsys, "approximate", "--operator", f"finite-pc:{f}", "--s", "2")
    assert json.loads(out)["error"] == pytest.approx(0.25)
    a = run(capsys, "approximate", "--operator", "norm", "--s", "2", "--mc", "500", "--seed", "9")[1]
    b = run(capsys, "approximate", "--operator", "norm", "--s", "2", "--mc", "500", "--seed", "9")[1]
    assert a == b


def test_approximate_capped(capsys, tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"terms": {"1:1": 1.0}, "R": 2.0}))
    code, out, _ = run(capsys, "approximate", "--operator", f"capped:{f}", "--s", "1", "--mc", "1000")
    obj = json.loads(out)
    assert code == 0 and obj["error"] > 0 and obj["ci"][0] <= obj["mean_square"] <= obj["ci"][1]


def test_resource_limit_exit_code(capsys, monkeypatch):
    import lipwidth.index_sets as ix

    monkeypatch.setattr(ix, "MAX_POPS", 10)
    monkeypatch.setattr(ix.enumerate_rearrangement, "__kwdefaults__", {"max_window": None, "max_pops": 10})
    assert run(capsys, "enumerate", "--count", "100")[0] == 3


def test_output_file(capsys, tmp_path):
    out = tmp_path / "o.csv"
    assert run(capsys, "enumerate", "--count", "3", "--output", str(out))[0] == 0
    assert out.read_text().startswith("rank,cost,weight,index")


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "lipwidth", "enumerate", "--count", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.splitlines()[2].endswith("1:1")
