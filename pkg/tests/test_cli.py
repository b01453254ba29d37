import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from twinpeaks import cli
from twinpeaks import reduce as red
from twinpeaks.peaks import TwinPeakModel, c_tilde, symmetric_model


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(symmetric_model(n=6, ell=2, gamma=0.05).to_json())
    return path


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_construct_symmetric_model(tmp_path, model_file):
    out = tmp_path / "out"
    assert cli.main(["construct", "--model", str(model_file), "--out", str(out)]) == 0
    data = json.loads((out / "construct.json").read_text())
    assert data["degree"] == -1 and data["det_sign"] == -1
    assert {"P_tau", "constants", "gamma_o", "D_tau"} <= set(data)
    assert "PASS  degree = -1" in (out / "summary.txt").read_text()


def test_construct_is_byte_identical_across_runs(tmp_path, model_file):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["construct", "--model", str(model_file), "--out", str(a), "--seed", "7"])
    cli.main(["construct", "--model", str(model_file), "--out", str(b), "--seed", "7"])
    assert (a / "construct.json").read_bytes() == (b / "construct.json").read_bytes()


def test_construct_rejects_positive_varpi(tmp_path, capsys):
    m = symmetric_model(n=6, ell=2, gamma=0.05)
    bad = TwinPeakModel(n=6, ell=2, gamma=0.05, q2=m.q2, P1=m.P1.scale(-1), P2=m.P2)
    path = tmp_path / "bad.json"
    path.write_text(bad.to_json())
    assert cli.main(["construct", "--model", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "pseudo-peak" in capsys.readouterr().err


def test_malformed_model_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert cli.main(["construct", "--model", str(path), "--out", str(tmp_path)]) == 2
    assert cli.main(["construct", "--model", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise red.NumericalFailure("root on the boundary")

    monkeypatch.setattr(red, "construct", boom)
    assert cli.main(["construct", "--out", str(tmp_path)]) == 3


def test_unknown_suite_and_tolerance_key(tmp_path):
    assert cli.main(["verify", "--suite", "nope", "--out", str(tmp_path)]) == 2
    assert cli.main(["verify", "--suite", "inequalities", "--tol", "bogus=1", "--out", str(tmp_path)]) == 2
    assert cli.main(["verify", "--suite", "inequalities", "--tol", "ineq_rel", "--out", str(tmp_path)]) == 2
    assert cli.main(["frobnicate"]) == 2


def test_seed_precedence(monkeypatch):
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    assert cli.make_config(["construct"]).seed == 0
    monkeypatch.setenv(cli.SEED_ENV, "42")
    assert cli.make_config(["construct"]).seed == 42
    assert cli.make_config(["construct", "--seed", "5"]).seed == 5
    monkeypatch.setenv(cli.SEED_ENV, "-1")
    with pytest.raises(cli.ConfigError):
        cli.make_config(["construct"])


def test_tolerance_override_reaches_suite(tmp_path):
    # an impossible tolerance turns every inequality row into a failure
    code = cli.main(["verify", "--suite", "inequalities", "--tol", "ineq_rel=-1", "--out", str(tmp_path)])
    assert code == 1
    header, rows = read_csv(tmp_path / "inequalities.csv")
    assert any(r[-1] == "FAIL" for r in rows)


def test_verify_inequalities_outputs(tmp_path):
    assert cli.main(["verify", "--suite", "inequalities", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "inequalities.csv")
    assert header == cli.CSV_HEADER
    assert rows and all(r[-1] == "pass" for r in rows)
    assert "rows pass" in (tmp_path / "summary.txt").read_text()


def test_verify_reduction_lemma(tmp_path):
    assert cli.main(["verify", "--suite", "reduction-lemma", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "reduction-lemma.csv")
    exact = [r for r in rows if r[0] == "exact"]
    assert len(exact) == 4 * 2 * 50


def test_verify_interaction_scaling(tmp_path):
    assert cli.main(["verify", "--suite", "interaction-scaling", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "interaction-scaling.csv")
    slopes = [r for r in rows if r[0].startswith("slope")]
    assert len(slopes) == 6 and all(r[-1] == "pass" for r in slopes)


def test_plot_data_requires_construct(tmp_path):
    assert cli.main(["plot-data", "--out", str(tmp_path / "empty")]) == 2


def test_plot_data_outputs(tmp_path, model_file):
    out = tmp_path / "o"
    assert cli.main(["construct", "--model", str(model_file), "--out", str(out)]) == 0
    assert cli.main(["plot-data", "--out", str(out)]) == 0
    data = json.loads((out / "construct.json").read_text())
    model = symmetric_model(n=6, ell=2, gamma=0.05)

    header, rows = read_csv(out / "profile.csv")
    assert all("[" in h and "]" in h for h in header)
    arr = np.array(rows, dtype=float)
    s, total = arr[:, 0], arr[:, 3]
    xi1 = data["P_tau"]["xi1"][0]
    xi2 = data["P_tau"]["xi2"][0]
    lam = data["P_tau"]["lambda1"]
    left = s < 0.5 * model.gamma
    assert abs(s[left][np.argmax(total[left])] - xi1) <= 0.2 * lam
    assert abs(s[~left][np.argmax(total[~left])] - xi2) <= 0.2 * lam

    header, rows = read_csv(out / "k_profile.csv")
    assert header[1].startswith("K [")
    arr = np.array(rows, dtype=float)
    n = model.n
    at_peaks = [arr[np.argmin(np.abs(arr[:, 0] - q)), 1] for q in (0.0, model.gamma)]
    np.testing.assert_allclose(at_peaks, n * (n - 2) / c_tilde(n), rtol=1e-6)

    header, rows = read_csv(out / "gamma_sweep.csv")
    assert header[0] == "gamma [length]" and len(rows) == 21


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "twinpeaks", "verify", "--suite", "nope"], capture_output=True, text=True)
    assert out.returncode == 2 and "unknown suite" in out.stderr
