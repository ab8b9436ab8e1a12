import numpy as np
import pytest
from scipy.special import erf

from tomostar.errors import InvalidInput, SingularWindow, UnresolvedWindow
from tomostar.phase_space import StateSpec, eval_state, make_grid
from tomostar.symplectic import (
    TomographicPoint,
    radon_forward,
    radon_forward_grid,
    radon_inverse,
    symplectic_tomogram,
)
from tomostar.thick import WindowFunction, thick_forward, thick_forward_grid, thick_from_ideal, window_normalization

ORIGIN = TomographicPoint(0.0, 1.0, 0.0)


@pytest.fixture
def fine_X():
    return np.linspace(-8.0, 8.0, 641)


def test_rectangular_normalization():
    assert window_normalization(WindowFunction("rectangular", np.pi)) == pytest.approx(0.5, abs=1e-12)
    assert WindowFunction("rectangular", 2.0).normalization == pytest.approx(1.0 / (2.0 * np.sin(1.0)), abs=1e-8)


def test_gaussian_normalization():
    assert WindowFunction("gaussian", 1.0).normalization == pytest.approx(np.exp(0.5), abs=1e-8)


def test_custom_normalization_matches_quadrature():
    Y = np.linspace(-1.0, 1.0, 201)
    window = WindowFunction("custom", Y=Y, samples=1.0 - np.abs(Y))
    # the triangle transforms to sinc^2: 2(1 - cos 1)
    assert window.normalization == pytest.approx(1.0 / (2.0 * (1.0 - np.cos(1.0))), rel=1e-4)


def test_singular_window():
    with pytest.raises(SingularWindow):
        window_normalization(WindowFunction("rectangular", 2.0 * np.pi))


@pytest.mark.parametrize(
    "data",
    [
        {"kind": "rectangular", "delta": -1.0},
        {"kind": "gaussian"},
        {"kind": "triangle", "delta": 1.0},
        {"kind": "custom", "Y": [0.0, 1.0], "Xi": [1.0, -1.0]},
        {"kind": "custom", "Y": [1.0, 0.0], "Xi": [1.0, 1.0]},
    ],
)
def test_bad_windows(data):
    with pytest.raises(InvalidInput):
        WindowFunction.from_dict(data)


def test_window_dict_round_trip():
    for data in ({"kind": "rectangular", "delta": 2.0}, {"kind": "gaussian", "sigma": 0.5}):
        assert WindowFunction.from_dict(data).to_dict() == data


def test_narrow_window_approaches_ideal(w0):
    x = TomographicPoint(0.4, 0.6, 0.8)
    narrow = WindowFunction("gaussian", 1e-3)
    assert thick_forward(w0, narrow, x) == pytest.approx(radon_forward(w0, x), abs=1e-4)


def test_rectangular_ground_state(w0):
    assert thick_forward(w0, WindowFunction("rectangular", 2.0), ORIGIN) == pytest.approx(erf(1.0), abs=1e-3)


def test_gaussian_ground_state(w0):
    # marginal N(0, 1/2) convolved with N(0, 1), at the origin
    value = thick_forward(w0, WindowFunction("gaussian", 1.0), ORIGIN)
    assert value == pytest.approx(1.0 / np.sqrt(3.0 * np.pi), abs=1e-6)


@pytest.mark.parametrize("window", [WindowFunction("rectangular", 2.0), WindowFunction("gaussian", 1.0)])
def test_convolution_matches_direct_path(w0, fine_X, window):
    theta = np.array([0.0, 1.0])
    smeared = thick_from_ideal(radon_forward_grid(w0, fine_X, theta), window)
    assert smeared.scheme == "thick"
    assert smeared.window is window
    for i, t in enumerate(theta):
        for index in (240, 300, 320, 350, 400):
            direct = thick_forward(w0, window, TomographicPoint.from_angle(fine_X[index], t))
            assert smeared.values[i, index] == pytest.approx(direct, abs=1e-6)


def test_nascent_delta_returns_the_slice(w0, fine_X):
    ideal = radon_forward_grid(w0, fine_X, np.array([0.3]))
    smeared = thick_from_ideal(ideal, WindowFunction("gaussian", 1e-3))
    np.testing.assert_allclose(smeared.values, ideal.values, atol=1e-4)


def test_zero_slice(fine_X):
    zero = symplectic_tomogram(fine_X, np.array([0.0]), np.zeros((1, len(fine_X))))
    assert np.all(thick_from_ideal(zero, WindowFunction("rectangular", 1.0)).values == 0)


def test_unit_mass_window_preserves_slice_mass(w0, fine_X):
    w = thick_forward_grid(w0, WindowFunction("gaussian", 1.0), fine_X, np.linspace(0.0, np.pi, 8, endpoint=False))
    np.testing.assert_allclose(w.slice_masses(), 1.0, atol=1e-3)


def test_thick_slices_converge_to_ideal(w0, fine_X):
    theta = np.array([0.7])
    ideal = radon_forward_grid(w0, fine_X, theta)
    distances = [
        np.max(np.abs(thick_from_ideal(ideal, WindowFunction("gaussian", s)).values - ideal.values))
        for s in (0.3, 0.1, 0.03)
    ]
    assert distances[0] > distances[1] > distances[2]


def test_custom_window_must_be_resolved(w0):
    X = np.linspace(-8.0, 8.0, 161)
    ideal = radon_forward_grid(w0, X, np.array([0.0]))
    Y = np.linspace(-0.5, 0.5, 101)
    spike = np.where(np.abs(Y - 0.03) < 0.02, 1.0, 0.0)
    with pytest.raises(UnresolvedWindow, match="mass"):
        thick_from_ideal(ideal, WindowFunction("custom", Y=Y, samples=spike))
    coarse = np.linspace(-0.5, 0.5, 11)
    smeared = thick_from_ideal(ideal, WindowFunction("custom", Y=coarse, samples=np.ones_like(coarse)))
    assert smeared.values[0, 80] == pytest.approx(erf(0.5), abs=2e-3)


def test_finely_sampled_smooth_window_is_accepted(w0):
    X = np.linspace(-8.0, 8.0, 161)
    ideal = radon_forward_grid(w0, X, np.array([0.0]))
    Y = np.arange(-400, 401) * 0.01
    window = WindowFunction("custom", Y=Y, samples=np.exp(-0.5 * Y**2) / np.sqrt(2.0 * np.pi))
    smeared = thick_from_ideal(ideal, window)
    assert smeared.values[0, 80] == pytest.approx(1.0 / np.sqrt(3.0 * np.pi), abs=1e-3)


def test_window_narrower_than_two_steps(w0):
    ideal = radon_forward_grid(w0, np.linspace(-8.0, 8.0, 161), np.array([0.0]))
    Y = np.linspace(0.01, 0.05, 5)
    with pytest.raises(UnresolvedWindow):
        thick_from_ideal(ideal, WindowFunction("custom", Y=Y, samples=np.ones_like(Y)))


def test_thick_from_ideal_needs_ideal_input(w0, fine_X):
    smeared = thick_forward_grid(w0, WindowFunction("gaussian", 0.5), fine_X, np.array([0.0]))
    with pytest.raises(InvalidInput):
        thick_from_ideal(smeared, WindowFunction("gaussian", 0.5))


@pytest.mark.parametrize("alpha", [0j, 1.0 + 0j])
def test_thick_tomogram_inverts_to_the_state(source_grid, acceptance_lattice, alpha):
    spec = StateSpec("coherent", alpha=alpha)
    w = thick_forward_grid(
        eval_state(spec, source_grid), WindowFunction("gaussian", 0.5), acceptance_lattice["X"], acceptance_lattice["theta"]
    )
    target = acceptance_lattice["target"]
    reference = eval_state(spec, target).values
    error = np.linalg.norm(radon_inverse(w, target).values - reference) / np.linalg.norm(reference)
    assert error <= 5e-3


def test_wide_rectangle_cannot_be_deconvolved(w0, acceptance_lattice):
    w = thick_forward_grid(w0, WindowFunction("rectangular", 2.0), acceptance_lattice["X"], acceptance_lattice["theta"])
    with pytest.raises(SingularWindow):
        radon_inverse(w, make_grid(-3.0, 3.0, -3.0, 3.0, 31, 31))


def test_narrow_rectangle_deconvolves(w0, acceptance_lattice):
    w = thick_forward_grid(w0, WindowFunction("rectangular", 0.4), acceptance_lattice["X"], acceptance_lattice["theta"])
    target = make_grid(-3.0, 3.0, -3.0, 3.0, 61, 61)
    reference = eval_state(StateSpec("coherent"), target).values
    error = np.linalg.norm(radon_inverse(w, target).values - reference) / np.linalg.norm(reference)
    assert error <= 1e-2
