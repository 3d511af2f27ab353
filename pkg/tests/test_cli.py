import csv
import io
import json

import numpy as np
import pytest

from zener import cli
from zener.roots import CrossValidation


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"c2": 2.0, "a": [-1.0], "b": [1.0], "dim": 1}))
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_classify_reference(capsys, model_file):
    code, out, _ = run(capsys, "classify", "--model", model_file, "--xi", "1.0")
    assert code == 0
    doc = json.loads(out)
    assert doc["case"] == "negative-a/g0>0"
    assert {k: doc["counts"][k] for k in ("left", "zero", "right")} == {"left": 3, "zero": 0, "right": 0}
    assert doc["hurwitz"]["variations"] == 0
    assert doc["cross_check"]["agree"]


def test_classify_zero_frequency(capsys, model_file):
    code, out, _ = run(capsys, "classify", "--model", model_file, "--xi", "0")
    doc = json.loads(out)
    assert code == 0
    assert doc["counts"]["left"] == 1 and doc["counts"]["origin"] == 2


def test_classify_grid_csv(capsys, model_file):
    code, out, _ = run(capsys, "classify", "--model", model_file, "--xi-min", "0.1", "--xi-max", "10",
                       "--samples", "5", "--format", "csv")
    rows = table(out)
    assert code == 0 and len(rows) == 5
    assert all(r["left"] == "3" for r in rows)


def test_classify_mismatch_exit(capsys, model_file, monkeypatch):
    fake = CrossValidation(False, {}, {}, "x", {"left": (3, 2)})
    monkeypatch.setattr(cli, "cross_validate", lambda m, xi: fake)
    code, _, err = run(capsys, "classify", "--model", model_file, "--xi", "1.0")
    assert code == 3 and "mismatch" in err


def test_malformed_model(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"c2": -1.0, "a": [-1.0], "b": [1.0], "dim": 1}))
    code, _, err = run(capsys, "classify", "--model", str(path), "--xi", "1")
    assert code == 2 and "c2" in err
    path.write_text("{ not json")
    code, _, _ = run(capsys, "classify", "--model", str(path), "--xi", "1")
    assert code == 2


def test_wrong_xi_components(capsys, model_file):
    code, _, _ = run(capsys, "classify", "--model", model_file, "--xi", "1,2")
    assert code == 2


def test_spectrum(capsys, model_file):
    code, out, _ = run(capsys, "spectrum", "--model", model_file, "--xi", "1")
    rows = table(out)
    assert code == 0 and len(rows) == 3
    assert list(rows[0]) == ["xi", "re_lambda", "im_lambda", "multiplicity", "residual"]
    assert min(float(r["re_lambda"]) for r in rows) == pytest.approx(-0.56984, abs=1e-5)


def test_dispersion_endpoints(capsys, model_file):
    code, out, _ = run(capsys, "dispersion", "--model", model_file, "--xi-min", "1e-3", "--xi-max", "1e3",
                       "--samples", "13")
    rows = table(out)
    assert code == 0
    assert list(rows[0]) == cli.DISPERSION_COLUMNS
    first = [r for r in rows if float(r["xi"]) == pytest.approx(1e-3) and abs(float(r["im_lambda"])) > 1e-4]
    assert len(first) == 2
    for r in first:
        assert float(r["re_lambda"]) == pytest.approx(-5e-7, rel=1e-3)
    last = [r for r in rows if float(r["xi"]) == pytest.approx(1e3) and abs(float(r["im_lambda"])) > 1]
    for r in last:
        assert float(r["re_lambda"]) == pytest.approx(-0.25, abs=1e-6)
    assert all(r["status"] in ("ok", "no-series") for r in rows)


def test_dispersion_branch_continuity(capsys, model_file):
    code, out, _ = run(capsys, "dispersion", "--model", model_file, "--xi-min", "0.5", "--xi-max", "2",
                       "--samples", "7")
    rows = table(out)
    for bid in "012":
        sel = [r for r in rows if r["branch_id"] == bid]
        x = np.array([float(r["xi"]) for r in sel])
        z = np.array([complex(float(r["re_lambda"]), float(r["im_lambda"])) for r in sel])
        # eigenvalues move at most at about speed c in |xi|
        assert np.all(np.abs(np.diff(z)) <= 1.5 * np.sqrt(2.0) * np.diff(x))
        assert len(set(np.sign(z.imag).round())) == 1


def test_dispersion_single_sample(capsys, model_file):
    code, out, _ = run(capsys, "dispersion", "--model", model_file, "--xi-min", "1", "--xi-max", "1",
                       "--samples", "1")
    rows = table(out)
    assert code == 0 and len(rows) == 3
    assert {r["status"] for r in rows} == {"no-series"}


def test_evolve_time_zero(capsys, model_file):
    code, out, _ = run(capsys, "evolve", "--model", model_file, "--xi", "1", "--t", "0",
                       "--state", "0.5,1,-2")
    rows = table(out)
    assert code == 0 and len(rows) == 1
    assert [float(rows[0][f"re_{n}"]) for n in ("u", "v1", "w1_1")] == [0.5, 1.0, -2.0]
    assert all(float(rows[0][f"im_{n}"]) == 0.0 for n in ("u", "v1", "w1_1"))


def test_evolve_saturation(capsys, tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"c2": 2.0, "a": [1.0], "b": [1.0], "dim": 1}))
    code, _, err = run(capsys, "evolve", "--model", str(path), "--xi", "1", "--t", "1e5")
    assert code == 2 and "saturates" in err


def test_energy_monotone(capsys, model_file):
    code, out, _ = run(capsys, "energy", "--model", model_file, "--xi", "1", "--t-max", "50", "--dt", "0.01")
    rows = table(out)
    assert code == 0 and len(rows) == 5001
    assert list(rows[0]) == ["t", "E_hat", "E_lyap", "bound"]
    E = np.array([float(r["E_lyap"]) for r in rows])
    assert np.max(np.diff(E)) <= 10 * 0.01**4
    assert all(float(r["E_hat"]) <= float(r["bound"]) + 1e-12 for r in rows)


def test_energy_rejects_large_step(capsys, model_file):
    code, _, err = run(capsys, "energy", "--model", model_file, "--xi", "1", "--t-max", "1", "--dt", "0.5")
    assert code == 2 and "dt" in err


def test_wave(capsys, model_file):
    code, out, _ = run(capsys, "wave", "--model", model_file, "--t", "5", "--grid", "256", "--length", "100")
    rows = table(out)
    assert code == 0 and len(rows) == 256
    assert max(abs(float(r["u"])) for r in rows) < 1.0


def test_output_is_deterministic(capsys, model_file, tmp_path):
    outs = []
    for i in range(2):
        target = tmp_path / f"o{i}.csv"
        run(capsys, "dispersion", "--model", model_file, "--xi-min", "0.01", "--xi-max", "100",
            "--samples", "9", "--out", str(target))
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
