import numpy as np
import pytest

from tomostar import verify
from tomostar.errors import InvalidInput, NonConvergent
from tomostar.operators import fock_density
from tomostar.verify import Check, kernel_suite, quadratic_points, run_suite, symplectic_points, truncation_shift


def _fake_suite(*args):
    return [Check("good", True, 0.0, 1e-3), Check("bad", False, 1.0, 1e-3)]


def test_measure_records_errors():
    def boom():
        raise NonConvergent("no limit")

    check = verify._measure("boom", 1e-3, boom)
    assert not check.passed
    assert check.error is None
    assert check.message.startswith("NonConvergent")


def test_measure_rejects_nan():
    assert not verify._measure("nan", 1.0, lambda: float("nan")).passed
    assert verify._measure("small", 1.0, lambda: 0.5).passed


def test_unknown_suite():
    with pytest.raises(InvalidInput):
        run_suite("everything")


def test_report_lists_failures(monkeypatch):
    monkeypatch.setattr(verify, "kernel_suite", _fake_suite)
    report = run_suite("kernels", seed=1, dim=8)
    assert report["suite"] == "kernels"
    assert report["seed"] == 1
    assert report["dim"] == 8
    assert report["dim_check"] == 24
    assert not report["passed"]
    assert report["failed"] == ["bad"]
    assert report["checks"][0] == {"name": "good", "passed": True, "error": 0.0, "tol": 1e-3, "message": ""}


def test_all_runs_every_suite(monkeypatch):
    calls = []
    for name in ("classical_suite", "quantum_suite", "kernel_suite"):
        monkeypatch.setattr(verify, name, lambda *args, name=name: calls.append(name) or [])
    report = run_suite()
    assert calls == ["classical_suite", "quantum_suite", "kernel_suite"]
    assert report["passed"]


def test_symplectic_points_lie_near_support():
    for x1, x2, x3 in symplectic_points(np.random.default_rng(0), 0.0):
        total = np.array([x1.mu + x2.mu, x1.nu + x2.nu])
        m3 = np.array([x3.mu, x3.nu])
        # m1 + m2 is a multiple of m3
        assert abs(total[0] * m3[1] - total[1] * m3[0]) < 1e-12


def test_quadratic_points_start_at_origin():
    points = quadratic_points(np.random.default_rng(0), 0.1)
    assert len(points) == 5
    assert all(x.X == x.mu == x.nu == 0.0 for x in points[0])


@pytest.mark.slow
def test_kernel_suite_passes():
    failed = [c for c in kernel_suite(7) if not c.passed]
    assert not failed, failed


def test_truncation_shift_pads_operators():
    small, large = fock_density(1, 8), fock_density(1, 12)
    assert truncation_shift(small, large) == 0.0
    assert truncation_shift(fock_density(0, 8), large) == pytest.approx(np.sqrt(2.0))


def test_truncation_shift_of_arrays_and_scalars():
    assert truncation_shift(np.array([1.0, 2.0]), np.array([1.0, 2.2])) == pytest.approx(0.2 / 2.2)
    assert truncation_shift(0.5 + 0j, 0.25) == pytest.approx(0.25)


def test_checks_at_both_truncations():
    values = {8: 1.0, 12: 1.0005}
    checks = verify._at_truncations("value", 1e-2, 1e-3, values.get, lambda v: abs(v - 1.0), 8, 12)
    assert [c.name for c in checks] == ["value at dim 8", "value at dim 12", "value truncation shift 8->12"]
    assert all(c.passed for c in checks)
    assert checks[2].error == pytest.approx(5e-4)


def test_moving_result_fails_the_shift_check():
    values = {8: 1.0, 12: 1.005}
    checks = verify._at_truncations("value", 1e-2, 1e-3, values.get, lambda v: abs(v - 1.0), 8, 12)
    assert checks[1].passed
    assert not checks[2].passed


def test_failed_cutoff_fails_the_shift_check():
    def compute(d):
        if d == 12:
            raise NonConvergent("no limit")
        return 1.0

    checks = verify._at_truncations("value", 1e-2, 1e-3, compute, lambda v: 0.0, 8, 12)
    assert [c.passed for c in checks] == [True, False, False]


def test_run_suite_threads_config(monkeypatch):
    seen = {}

    def quantum(seed, dim, dim_check, config):
        seen.update(dim=dim, dim_check=dim_check, eps=config["test_eps"], seed=config["seed"])
        return []

    monkeypatch.setattr(verify, "quantum_suite", quantum)
    report = run_suite("quantum", dim=10, config={"dim_check": 14, "test_eps": 0.2})
    assert seen == {"dim": 10, "dim_check": 14, "eps": 0.2, "seed": 7}
    assert report["dim_check"] == 14


def test_asymmetry_witness_uses_the_configured_width():
    assert verify._asymmetry_witness(0.05) <= 0.0
