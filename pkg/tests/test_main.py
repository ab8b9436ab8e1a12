import json

import numpy as np
import pytest
from scipy.special import erf

from tomostar import main as cli
from tomostar.fileio import load_operator, read_phase_function, read_tomogram, write_json
from tomostar.main import build_parser, main
from tomostar.operators import fock_density


@pytest.fixture
def ground_file(tmp_path):
    path = tmp_path / "ground.json"
    write_json(path, {"kind": "coherent", "alpha": [0.0, 0.0]})
    return path


def test_parser_defaults():
    args = build_parser().parse_args(["forward", "--state", "s.json", "-o", "w.csv"])
    assert args.scheme == "symplectic"
    assert args.theta == "0:pi:64"
    assert args.mu == args.nu == "-5:5:41"
    assert not args.debug


def test_forward_symplectic(tmp_path, ground_file, capsys):
    out = tmp_path / "w.csv"
    assert main(["forward", "--state", str(ground_file), "-o", str(out)]) == 0
    w = read_tomogram(out)
    assert w.values.size == 121 * 64
    assert w.values[0, 60] == pytest.approx(1.0 / np.sqrt(np.pi), abs=1e-3)
    assert "slice masses" in capsys.readouterr().out


def test_forward_thick(tmp_path, ground_file):
    out = tmp_path / "thick.csv"
    window = '{"kind": "rectangular", "delta": 2.0}'
    assert main(["forward", "--scheme", "thick", "--window", window, "--state", str(ground_file), "-o", str(out)]) == 0
    w = read_tomogram(out)
    assert w.window.width == 2.0
    assert w.values[0, 60] == pytest.approx(erf(1.0), abs=1e-3)


def test_forward_thick_needs_window(tmp_path, ground_file):
    assert main(["forward", "--scheme", "thick", "--state", str(ground_file), "-o", str(tmp_path / "w.csv")]) == 2


def test_forward_quadratic(tmp_path, ground_file):
    out = tmp_path / "quad.csv"
    argv = ["forward", "--scheme", "quadratic", "--state", str(ground_file), "--X=0:4:5", "--mu=-1:1:3", "--nu=-1:1:3"]
    assert main(argv + ["-o", str(out)]) == 0
    w = read_tomogram(out)
    np.testing.assert_allclose(w.values[1, 1], np.exp(-w.X), atol=1e-3)


def test_forward_bad_range(tmp_path, ground_file):
    assert main(["forward", "--state", str(ground_file), "--X=6:-6:121", "-o", str(tmp_path / "w.csv")]) == 2


def test_invert_with_reference(tmp_path, ground_file, capsys):
    tomogram, phase = tmp_path / "w.csv", tmp_path / "f.csv"
    assert main(["forward", "--state", str(ground_file), "-o", str(tomogram)]) == 0
    assert main(["invert", str(tomogram), "--reference", str(ground_file), "-o", str(phase)]) == 0
    f = read_phase_function(phase)
    assert f.grid.shape == (101, 101)
    error = float(capsys.readouterr().out.strip().splitlines()[-1].split(":")[1])
    assert error < 1e-2


def test_invert_operator(tmp_path):
    state, tomogram, rho = tmp_path / "fock.json", tmp_path / "w.csv", tmp_path / "rho.json"
    write_json(state, {"kind": "fock", "n": 0})
    forward = ["forward", "--quantum", "--state", str(state), "--X=-8:8:321", "--theta=0:pi:48", "-o", str(tomogram)]
    assert main(forward) == 0
    assert main(["invert", str(tomogram), "--operator", "--dim", "16", "-o", str(rho)]) == 0
    assert (load_operator(rho) - fock_density(0, 16)).norm() <= 1e-3


def test_invert_thick_tomogram(tmp_path, ground_file, capsys):
    tomogram, phase = tmp_path / "thick.csv", tmp_path / "f.csv"
    window = '{"kind": "gaussian", "delta": 0.5}'
    forward = ["forward", "--scheme", "thick", "--window", window, "--state", str(ground_file), "-o", str(tomogram)]
    assert main(forward) == 0
    assert main(["invert", str(tomogram), "--reference", str(ground_file), "-o", str(phase)]) == 0
    error = float(capsys.readouterr().out.strip().splitlines()[-1].split(":")[1])
    assert error < 1e-2


def test_quadratic_invert_needs_constant(tmp_path, ground_file):
    tomogram = tmp_path / "quad.csv"
    argv = ["forward", "--scheme", "quadratic", "--state", str(ground_file), "--X=0:4:5", "--mu=-1:1:3", "--nu=-1:1:3"]
    assert main(argv + ["-o", str(tomogram)]) == 0
    assert main(["invert", str(tomogram), "-o", str(tmp_path / "f.csv")]) == 2


def test_invert_empty_file(tmp_path):
    tomogram = tmp_path / "empty.csv"
    tomogram.write_text("")
    assert main(["invert", str(tomogram), "-o", str(tmp_path / "f.csv")]) == 2


def test_kernel_command(tmp_path, capsys):
    out = tmp_path / "k.json"
    request = {"scheme": "quadratic", "x1": [0, 0, 0], "x2": [0, 0, 0], "x3": [0, 0, 0], "test": {"eps": 0.05}}
    assert main(["kernel", "--request", json.dumps(request), "-o", str(out)]) == 0
    expected = 1.0 / (np.sqrt(2.0 * np.pi) * 0.05) / (2.0 * np.pi**3)
    result = json.loads(out.read_text())
    assert result["re"] == pytest.approx(0.0, abs=1e-12)
    assert result["im"] == pytest.approx(-expected, rel=1e-12)
    assert json.loads(capsys.readouterr().out) == result


def test_kernel_bad_request():
    assert main(["kernel", "--request", '{"scheme": "quadratic"}']) == 2


def test_verify_exit_codes(monkeypatch, tmp_path):
    report = {"suite": "kernels", "seed": 7, "dim": 16, "passed": True, "failed": [], "checks": []}
    monkeypatch.setattr(cli, "run_suite", lambda *args: report)
    out = tmp_path / "report.json"
    assert main(["verify", "--suite", "kernels", "-o", str(out)]) == 0
    assert json.loads(out.read_text()) == report
    monkeypatch.setattr(cli, "run_suite", lambda *args: {**report, "passed": False, "failed": ["x"]})
    assert main(["verify"]) == 1


def test_bad_config_file(tmp_path, ground_file):
    config = tmp_path / "config.json"
    config.write_text("{oops")
    assert main(["--config", str(config), "forward", "--state", str(ground_file), "-o", str(tmp_path / "w.csv")]) == 2


@pytest.mark.slow
def test_calibrate(tmp_path):
    out = tmp_path / "calib.json"
    assert main(["calibrate", "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["c"] > 0
    assert data["reference"]["kind"] == "coherent"


def test_config_leakage_tolerance_reaches_density(tmp_path):
    state, config = tmp_path / "coherent.json", tmp_path / "config.json"
    write_json(state, {"kind": "coherent", "alpha": [1.5, 0.0]})
    forward = ["forward", "--quantum", "--state", str(state), "--X=-8:8:161", "--theta=0:pi:16"]
    assert main(forward + ["-o", str(tmp_path / "a.csv")]) == 0
    write_json(config, {"leakage_tol": 1e-9})
    assert main(["--config", str(config)] + forward + ["-o", str(tmp_path / "b.csv")]) == 3


def test_config_kernel_damping_reaches_evaluator(monkeypatch, tmp_path):
    seen = {}

    def evaluate(request, damping_levels=None):
        seen["damping"] = damping_levels
        return 0j

    monkeypatch.setattr(cli, "evaluate_request", evaluate)
    config = tmp_path / "config.json"
    write_json(config, {"kernel_damping_levels": [0.08, 0.04]})
    request = {"scheme": "quadratic", "x1": [0, 0, 0], "x2": [0, 0, 0], "x3": [0, 0, 0]}
    assert main(["--config", str(config), "kernel", "--request", json.dumps(request), "--mode", "oracle"]) == 0
    assert seen["damping"] == (0.08, 0.04)


def test_verify_passes_loaded_config(monkeypatch, tmp_path):
    seen = {}

    def run(suite, seed, dim, dim_check, config):
        seen.update(suite=suite, seed=seed, dim=dim, dim_check=dim_check, config=config)
        return {"passed": True, "failed": [], "checks": []}

    monkeypatch.setattr(cli, "run_suite", run)
    config = tmp_path / "config.json"
    write_json(config, {"dim_check": 30, "test_eps": 0.1})
    assert main(["--config", str(config), "verify", "--suite", "quantum", "--dim", "20"]) == 0
    assert (seen["dim"], seen["dim_check"]) == (20, 30)
    assert seen["config"]["test_eps"] == 0.1
