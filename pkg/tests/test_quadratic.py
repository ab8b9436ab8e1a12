import numpy as np
import pytest
from scipy.integrate import trapezoid

from tomostar.errors import CalibrationUnstable, InvalidInput, NonConvergent, TruncatedSupport
from tomostar.phase_space import StateSpec, eval_state, make_grid, translate
from tomostar.quadratic import (
    calibrate_inverse_constant,
    calibration_lattice,
    circle_forward,
    circle_forward_grid,
    circle_forward_points,
    fit_constant,
    quadratic_inverse,
    quadratic_tomogram,
    round_trip,
    slice_transforms,
)
from tomostar.symplectic import TomographicPoint, symplectic_tomogram


@pytest.mark.parametrize("X", [0.25, 1.0, 3.0])
def test_ground_state_circles(w0, X):
    assert circle_forward(w0, TomographicPoint(X, 0.0, 0.0)) == pytest.approx(np.exp(-X), abs=1e-10)


def test_no_circle_for_nonpositive_X(w0):
    assert circle_forward(w0, TomographicPoint(-1.0, 0.0, 0.0)) == 0.0
    assert circle_forward(w0, TomographicPoint(0.0, 0.3, 0.1)) == 0.0


def test_slice_mass(w0):
    X = np.linspace(1e-6, 30.0, 3001)
    assert trapezoid(circle_forward_points(w0, X, 0.0, 0.0), X) == pytest.approx(1.0, abs=1e-3)


def test_translation_covariance(source_grid):
    f = eval_state(StateSpec("fock", n=1), source_grid)
    moved = translate(f, 0.7, -0.4)
    X = np.array([0.3, 1.1, 2.4])
    np.testing.assert_allclose(
        circle_forward_points(moved, X, 0.5, 0.2),
        circle_forward_points(f, X, 0.5 - 0.7, 0.2 + 0.4),
        atol=1e-6,
    )


def test_circles_leaving_the_support():
    f = eval_state(StateSpec("coherent"), make_grid(-2.0, 2.0, -2.0, 2.0, 41, 41))
    with pytest.raises(TruncatedSupport):
        circle_forward(f, TomographicPoint(9.0, 0.0, 0.0))


def test_grid_layout(w0):
    X = np.linspace(0.0, 4.0, 5)
    w = circle_forward_grid(w0, X, np.array([-1.0, 0.0, 1.0]), np.array([0.0, 0.5]))
    assert w.scheme == "quadratic"
    assert w.values.shape == (3, 2, 5)
    np.testing.assert_allclose(w.values[1, 0, 1:], np.exp(-X[1:]), atol=1e-10)


def _exponential_tomogram(x_max):
    X = np.linspace(0.0, x_max, int(20 * x_max) + 1)
    mu = nu = np.linspace(-1.0, 1.0, 3)
    values = np.broadcast_to(np.exp(-X), (3, 3, len(X))).copy()
    return quadratic_tomogram(X, mu, nu, values)


def test_slice_transform_uses_positive_limit():
    g = slice_transforms(_exponential_tomogram(40.0))
    np.testing.assert_allclose(g, 0.5 + 0.5j, rtol=1e-3)


def test_unresolved_slices_raise():
    with pytest.raises(NonConvergent, match="9 of 9 slices.*extend the X lattice to about 18"):
        slice_transforms(_exponential_tomogram(5.0))


def test_looser_cutoff_accepts_short_slices():
    g = slice_transforms(_exponential_tomogram(5.0), x_cutoff_rel=1e-2)
    np.testing.assert_allclose(g, 0.5 + 0.5j, atol=1e-2)


def test_short_ground_state_lattice_is_not_silently_zero(w0):
    axis = np.linspace(-1.0, 1.0, 11)
    w = circle_forward_grid(w0, np.linspace(0.0, 5.0, 51), axis, axis)
    with pytest.raises(NonConvergent):
        quadratic_inverse(w, make_grid(-1.0, 1.0, -1.0, 1.0, 5, 5), c=1.0 / np.pi)


def test_inverse_of_zero_is_zero():
    w = _exponential_tomogram(40.0).with_values(np.zeros((3, 3, 801)))
    f = quadratic_inverse(w, make_grid(-1.0, 1.0, -1.0, 1.0, 5, 5))
    assert np.all(f.values == 0)


def test_inverse_needs_a_covering_center_lattice():
    with pytest.raises(NonConvergent):
        quadratic_inverse(_exponential_tomogram(40.0), make_grid(-1.0, 1.0, -1.0, 1.0, 5, 5))


def test_inverse_rejects_other_schemes():
    X = np.linspace(-1.0, 1.0, 5)
    w = symplectic_tomogram(X, np.zeros(1), np.zeros((1, 5)))
    with pytest.raises(InvalidInput):
        quadratic_inverse(w, make_grid(-1.0, 1.0, -1.0, 1.0, 5, 5))


def test_inverse_rejects_bad_damping():
    with pytest.raises(InvalidInput):
        quadratic_inverse(_exponential_tomogram(40.0), make_grid(-1.0, 1.0, -1.0, 1.0, 5, 5), damping_levels=[0.2, 0.0])


def test_fit_constant(w0):
    assert fit_constant(2.0 * w0, w0) == pytest.approx(0.5)


@pytest.fixture(scope="module")
def ground_round_trip():
    return round_trip(StateSpec("coherent"), 1.0)


@pytest.mark.slow
def test_calibrated_round_trip(ground_round_trip):
    reconstructed, reference = ground_round_trip
    c = fit_constant(reconstructed, reference)
    assert c == pytest.approx(1.0 / np.pi, rel=5e-2)
    error = np.linalg.norm(c * reconstructed.values - reference.values) / np.linalg.norm(reference.values)
    assert error <= 5e-2


@pytest.mark.slow
def test_unit_constant_inflates_mass_by_pi(ground_round_trip):
    reconstructed, _ = ground_round_trip
    assert reconstructed.integral().real == pytest.approx(np.pi, rel=5e-2)


@pytest.mark.slow
def test_coherent_reconstruction_peaks_at_mean():
    lattice = calibration_lattice()
    reconstructed, _ = round_trip(StateSpec("coherent", alpha=1.0 + 0j), 1.0 / np.pi, lattice)
    target = lattice["target"]
    i, j = np.unravel_index(np.argmax(reconstructed.values.real), target.shape)
    assert target.q[i] == pytest.approx(np.sqrt(2.0), abs=target.dq)
    assert target.p[j] == pytest.approx(0.0, abs=target.dp)


@pytest.mark.slow
def test_calibration_is_state_independent():
    assert calibrate_inverse_constant() == pytest.approx(1.0 / np.pi, rel=5e-2)


@pytest.mark.slow
def test_calibration_flags_unstable_fits():
    with pytest.raises(CalibrationUnstable):
        calibrate_inverse_constant(tol=1e-12)
