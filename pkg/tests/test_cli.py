import json
import math

import numpy as np
import pytest

from poisson_lab.cli import main
from poisson_lab.signals import sample_function, write_signal_csv


@pytest.fixture()
def sine_csv(tmp_path):
    path = tmp_path / "sine.csv"
    write_signal_csv(sample_function(np.sin, 0.0, 200.0, 0.01), path)
    return path


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("s1-opial-scalar", "levitan", "s3-coop-2d",
                 "s4-dde-linear", "s5-rd-scalar"):
        assert name in out


def test_classify_file(sine_csv, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["classify", str(sine_csv), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["classes"]["periodic"]["verdict"] == "yes"
    assert report["classes"]["periodic"]["params"]["period"] == pytest.approx(
        2 * math.pi, abs=0.02)


def test_classify_empty_file(tmp_path, capsys):
    bad = tmp_path / "empty.csv"
    bad.write_text("")
    assert main(["classify", str(bad)]) == 2


def test_classify_non_uniform_grid(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,x1\n0,0\n0.1,1\n0.35,2\n")
    assert main(["classify", str(bad)]) == 2


def test_compare_same_file(sine_csv, tmp_path, capsys):
    out = tmp_path / "cmp.json"
    assert main(["compare", str(sine_csv), str(sine_csv),
                 "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["verdict"] == "comparable-evidence"
    for eps, dh in payload["pairs"]:
        assert dh == "inf" or dh >= eps


def test_classify_two_frequency_file(tmp_path, capsys):
    from poisson_lab.systems import forcing_signal

    path = tmp_path / "h.csv"
    write_signal_csv(forcing_signal("levitan-base", 0.0, 1000.0, 0.05), path)
    out = tmp_path / "report.json"
    assert main(["classify", str(path), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    quasi = report["classes"]["quasi_periodic"]
    assert quasi["verdict"] == "yes"
    freqs = sorted(quasi["params"]["freqs"])
    assert abs(freqs[0] - 1.0) <= 1e-2
    assert abs(freqs[1] - math.sqrt(2.0)) <= 1e-2


def test_compare_levitan_pair(tmp_path, capsys):
    from poisson_lab.systems import forcing_signal

    psi = tmp_path / "psi.csv"
    phi = tmp_path / "phi.csv"
    write_signal_csv(forcing_signal("levitan-psi", -200.0, 200.0, 0.025), psi)
    write_signal_csv(forcing_signal("levitan-phi", -200.0, 200.0, 0.025), phi)
    out = tmp_path / "cmp.json"
    assert main(["compare", str(psi), str(phi), "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["verdict"] == "comparable-evidence"


def test_compare_domain_mismatch(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    write_signal_csv(sample_function(np.sin, 0.0, 10.0, 0.01), a)
    write_signal_csv(sample_function(np.sin, 100.0, 110.0, 0.01), b)
    assert main(["compare", str(a), str(b)]) == 2


def test_compare_ramp_vs_sine(sine_csv, tmp_path, capsys):
    ramp_csv = tmp_path / "ramp.csv"
    write_signal_csv(
        sample_function(lambda t: np.asarray(t, dtype=float), 0.0, 200.0, 0.01),
        ramp_csv)
    out = tmp_path / "cmp.json"
    assert main(["compare", str(ramp_csv), str(sine_csv),
                 "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["verdict"] == "refuted"
    assert payload["witness"] is not None


def test_run_invalid_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({
        "name": "broken",
        "system": {"kind": "scalar_ode", "dim": 1, "rhs": "linear+trig",
                   "params": {"A": [[-1.0]], "forcing": [[]]}},
        "integrator": {"dt": -0.5},
    }))
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 2


def test_run_unknown_scenario_exit_2(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json")]) == 2


def test_run_custom_config_and_manifest_completeness(tmp_path, capsys):
    cfg = tmp_path / "decay.json"
    cfg.write_text(json.dumps({
        "name": "decay-demo",
        "system": {"kind": "scalar_ode", "dim": 1, "rhs": "linear+trig",
                   "params": {"A": [[-1.0]], "forcing": [[[1.0, 1.0, 0.0]]]}},
        "integrator": {"method": "rk45_adaptive", "dt": 0.01, "t_end": 60.0,
                       "record_dt": 0.05},
        "analysis": {"u0": [0.0]},
    }))
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    emitted = {p.name for p in out.iterdir()}
    assert emitted == set(manifest["files"])
    assert manifest["exit_code"] == 0


def test_usage_error_exit_2(capsys):
    assert main(["frobnicate"]) == 2
