import json
import shutil
import subprocess

import numpy as np
import pytest

from passivemc import cli
from passivemc.realization import RealizationArray, example_family
from passivemc.serialization import matrix_to_dict


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    fam = example_family()
    return {
        "f1": _write(tmp_path / "f1.json", fam.f1.to_dict()),
        "f2": _write(tmp_path / "f2.json", fam.f2.to_dict()),
        "big": _write(tmp_path / "big.json", RealizationArray.constant([[2.0]]).to_dict()),
        "set": _write(tmp_path / "set.json", {"H": matrix_to_dict(np.eye(2)), "alpha": 1.0,
                                              "closed": False}),
        "small": _write(tmp_path / "small.json", matrix_to_dict(0.5 * np.eye(2))),
        "large": _write(tmp_path / "large.json", matrix_to_dict(np.array([[0.0, 2.0], [0.0, 0.0]]))),
        "incl": _write(tmp_path / "incl.json", {"members": [(0.5 * np.eye(2)).tolist()]}),
        "bad": _write(tmp_path / "bad.json", {"rows": 2}),
        "dir": tmp_path,
    }


def _run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_stein_check_exit_codes(files, capsys):
    code, out, _ = _run(capsys, "stein-check", "--set", files["set"], "--matrix", files["small"])
    assert code == 0
    payload = json.loads(out)
    assert payload["member"] == "yes" and payload["norm_member"] == "yes"
    code, _, _ = _run(capsys, "stein-check", "--set", files["set"], "--matrix", files["large"])
    assert code == 1


def test_witness(files, capsys):
    code, out, _ = _run(capsys, "stein-witness", "--matrix", files["large"])
    assert code == 0
    assert json.loads(out)["product_norm"] == pytest.approx(4 / 3)
    assert _run(capsys, "stein-witness", "--matrix", files["small"])[0] == 1


def test_kyp_and_db(files, capsys):
    assert _run(capsys, "kyp-check", "--realization", files["f1"])[0] == 0
    code, out, _ = _run(capsys, "db-check", "--realization", files["f1"], "--samples", "90")
    assert code == 0 and json.loads(out)["verdict"] == "certified"
    code, out, err = _run(capsys, "db-check", "--realization", files["big"])
    assert code == 1 and "witness" in err


def test_certify_then_balance_round_trip(files, capsys):
    cert = files["dir"] / "cert.json"
    code, _, _ = _run(capsys, "certify-riccati", "--realization", files["f1"], "--out", str(cert))
    assert code == 0
    bal = files["dir"] / "bal.json"
    code, _, _ = _run(capsys, "balance", "--realization", files["f1"], "--cert", str(cert),
                      "--out", str(bal))
    assert code == 0
    assert _run(capsys, "kyp-check", "--realization", str(bal))[0] == 0
    assert _run(capsys, "kyp-check", "--realization", files["f1"], "--cert", str(cert))[0] == 0


def test_certify_riccati_not_found(files, capsys):
    code, out, _ = _run(capsys, "certify-riccati", "--realization", files["big"])
    assert code == 2
    assert json.loads(out)["verdict"] == "not-found"


def test_series_product_and_combine(files, capsys):
    prod = files["dir"] / "prod.json"
    assert _run(capsys, "series-product", "--realizations", files["f1"], files["f2"],
                "--out", str(prod))[0] == 0
    R = RealizationArray.from_dict(json.loads(prod.read_text()))
    assert R.n == 2
    iso = _write(files["dir"] / "iso.json", {"n": 1, "blocks": [[[0.6]], [[0.8]]]})
    code, out, _ = _run(capsys, "db-combine", "--isometry", iso, "--realizations",
                        files["f1"], files["f2"], "--samples", "90")
    assert code == 0
    assert json.loads(out)["db"]["verdict"] == "certified"


def test_mconvex(files, capsys):
    iso = _write(files["dir"] / "iso.json", {"n": 2, "blocks": [(np.eye(2) / np.sqrt(2)).tolist()] * 2})
    code, out, _ = _run(capsys, "mconvex", "--isometry", iso, "--matrices", files["small"], files["large"])
    assert code == 0
    res = np.array(json.loads(out)["result"]["re"])
    np.testing.assert_allclose(res, [[0.25, 1.0], [0.0, 0.25]])
    bad = _write(files["dir"] / "bad_iso.json", {"n": 2, "blocks": [np.eye(2).tolist()] * 2})
    assert _run(capsys, "mconvex", "--isometry", bad, "--matrices", files["small"], files["small"])[0] == 1


def test_simulate_deterministic_and_csv(files, capsys):
    argv = ["simulate", "--set", files["incl"], "--x0", "1,0", "--steps", "3"]
    code, a, _ = _run(capsys, *argv)
    _, b, _ = _run(capsys, *argv)
    assert code == 0 and a == b
    np.testing.assert_allclose(json.loads(a)["norms"], [1, 0.5, 0.25, 0.125])
    code, csv, _ = _run(capsys, *argv, "--format", "csv")
    assert csv.splitlines()[0] == "j,norm,member"
    assert len(csv.splitlines()) == 5


def test_certify_inclusion(files, capsys):
    assert _run(capsys, "certify-inclusion", "--set", files["incl"], "--alpha", "0.5")[0] == 0
    assert _run(capsys, "certify-inclusion", "--set", files["incl"], "--alpha", "0.4")[0] == 2
    tri = _write(files["dir"] / "tri.json", {"members": [[[0.9, 0.0], [0.5, 0.9]]]})
    code, out, _ = _run(capsys, "certify-inclusion", "--set", tri, "--alpha", "1", "--search-diagonal")
    assert code == 0 and json.loads(out)["beta"] > 1
    assert _run(capsys, "certify-inclusion", "--set", files["incl"], "--alpha", "2")[0] == 64


def test_demo(capsys):
    code, out, err = _run(capsys, "demo-examples")
    assert code == 0
    payload = json.loads(out)
    assert all(payload["checks"].values())
    assert "R_f5 = (1/36)" in err


def test_usage_and_data_errors(files, capsys):
    assert _run(capsys, "no-such-command")[0] == 64
    assert _run(capsys, "stein-check", "--set", files["set"])[0] == 64
    assert _run(capsys, "kyp-check", "--realization", str(files["dir"] / "missing.json"))[0] == 65
    assert _run(capsys, "stein-check", "--set", files["set"], "--matrix", files["bad"])[0] == 65
    garbage = files["dir"] / "garbage.json"
    garbage.write_text("{not json")
    assert _run(capsys, "kyp-check", "--realization", str(garbage))[0] == 65
    assert _run(capsys, "simulate", "--set", files["incl"], "--x0", "a,b")[0] == 64


@pytest.mark.skipif(shutil.which("passivemc") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["passivemc", "demo-examples"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["checks"]
