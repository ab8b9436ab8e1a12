import numpy as np
import pytest

from tomostar.errors import InvalidBounds, InvalidCount, InvalidInput, TruncatedSupportWarning
from tomostar.phase_space import (
    PhaseSpaceFunction,
    PhaseSpaceGrid,
    StateSpec,
    eval_state,
    from_callable,
    make_grid,
    moments,
    translate,
    weyl_to_wigner,
    wigner_to_weyl,
)


def test_make_grid_spacing():
    grid = make_grid(-5.0, 5.0, -2.0, 2.0, 101, 41)
    assert grid.dq == pytest.approx(0.1)
    assert grid.dp == pytest.approx(0.1)
    assert grid.shape == (101, 41)
    Q, P = grid.mesh()
    assert Q.shape == (101, 41)
    assert Q[-1, 0] == pytest.approx(5.0)
    assert P[0, -1] == pytest.approx(2.0)


@pytest.mark.parametrize("bounds", [(1.0, 1.0, 0.0, 1.0), (2.0, 1.0, 0.0, 1.0), (0.0, 1.0, 3.0, -3.0)])
def test_make_grid_rejects_unordered_bounds(bounds):
    with pytest.raises(InvalidBounds):
        make_grid(*bounds, 10, 10)


def test_make_grid_rejects_single_sample():
    with pytest.raises(InvalidCount):
        make_grid(0.0, 1.0, 0.0, 1.0, 1, 10)


def test_grid_dict_round_trip():
    grid = make_grid(-3.0, 3.0, -1.0, 2.0, 31, 16)
    assert PhaseSpaceGrid.from_dict(grid.to_dict()) == grid
    with pytest.raises(InvalidInput):
        PhaseSpaceGrid.from_dict({"q": [0, 1]})


def test_ground_state_is_normalized(w0):
    assert w0(0.0, 0.0) == pytest.approx(1.0 / np.pi)
    assert w0.integral() == pytest.approx(1.0, abs=1e-10)
    assert w0.boundary_ratio() < 1e-30


@pytest.mark.parametrize(
    "spec, mean, variance",
    [
        (StateSpec("coherent", alpha=1.0 + 0.5j), (np.sqrt(2.0), np.sqrt(2.0) * 0.5), 0.5),
        (StateSpec("fock", n=1), (0.0, 0.0), 1.5),
        (StateSpec("thermal", nbar=0.75), (0.0, 0.0), 1.25),
        (StateSpec("gaussian-classical", mean=(1.0, -1.0), cov=((0.8, 0.0), (0.0, 0.8))), (1.0, -1.0), 0.8),
    ],
)
def test_state_moments(spec, mean, variance, source_grid):
    norm, mean_q, mean_p, cov = moments(eval_state(spec, source_grid))
    assert norm == pytest.approx(1.0, abs=1e-8)
    assert (mean_q, mean_p) == pytest.approx(mean, abs=1e-8)
    np.testing.assert_allclose(cov, variance * np.eye(2), atol=1e-8)


def test_fock_wigner_is_negative_at_origin():
    f = eval_state(StateSpec("fock", n=1), make_grid(-6.0, 6.0, -6.0, 6.0, 61, 61))
    assert f(0.0, 0.0).real == pytest.approx(-1.0 / np.pi)


def test_moments_warn_on_truncated_support():
    f = eval_state(StateSpec("coherent"), make_grid(-1.0, 1.0, -1.0, 1.0, 21, 21))
    with pytest.warns(TruncatedSupportWarning):
        moments(f)


@pytest.mark.parametrize(
    "data",
    [
        {"kind": "squeezed"},
        {"kind": "fock", "n": -1},
        {"kind": "thermal", "nbar": -0.5},
        {"kind": "gaussian-classical", "mean": [0, 0], "cov": [[1, 0], [0, -1]]},
        {"kind": "fock"},
    ],
)
def test_state_spec_rejects_bad_descriptions(data):
    with pytest.raises(InvalidInput):
        StateSpec.from_dict(data)


def test_state_spec_dict_round_trip():
    for spec in (StateSpec("coherent", alpha=0.5 - 1j), StateSpec("fock", n=3), StateSpec("thermal", nbar=0.2)):
        assert StateSpec.from_dict(spec.to_dict()) == spec


def test_interpolation_matches_samples_and_vanishes_off_grid():
    grid = make_grid(-4.0, 4.0, -4.0, 4.0, 81, 81)
    Q, P = grid.mesh()
    f = PhaseSpaceFunction(grid, np.exp(-Q**2 - P**2))
    assert f(0.05, -0.15).real == pytest.approx(np.exp(-0.05**2 - 0.15**2), rel=1e-4)
    assert f(5.0, 0.0) == 0.0


def test_values_must_match_grid():
    with pytest.raises(InvalidInput):
        PhaseSpaceFunction(make_grid(0.0, 1.0, 0.0, 1.0, 5, 5), np.zeros((4, 5)))


def test_translate_moves_the_mean(w0):
    shifted = translate(w0, 1.5, -0.5)
    _, mean_q, mean_p, _ = moments(shifted)
    assert (mean_q, mean_p) == pytest.approx((1.5, -0.5), abs=1e-8)


def test_weyl_wigner_factor(w0):
    weyl = wigner_to_weyl(w0)
    assert weyl(0.0, 0.0) == pytest.approx(2.0)
    assert weyl_to_wigner(weyl)(0.3, 0.2) == pytest.approx(w0(0.3, 0.2))


def test_linear_combinations_keep_closed_form(source_grid):
    f = eval_state(StateSpec("coherent"), source_grid)
    g = from_callable(lambda q, p: np.exp(-(q**2) - p**2), source_grid)
    combined = 2.0 * f + g
    assert combined.analytic is not None
    assert combined(0.1, 0.2) == pytest.approx((2.0 / np.pi + 1.0) * np.exp(-0.05))
