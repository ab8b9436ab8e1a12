import numpy as np
import pytest

from tomostar.operators import fock_density
from tomostar.phase_space import StateSpec, eval_state, make_grid


@pytest.fixture
def ground_state():
    return StateSpec("coherent")


@pytest.fixture
def source_grid():
    return make_grid(-9.0, 9.0, -9.0, 9.0, 181, 181)


@pytest.fixture
def w0(ground_state, source_grid):
    """Wigner function of the oscillator ground state, exp(-q^2 - p^2)/pi."""
    return eval_state(ground_state, source_grid)


@pytest.fixture
def acceptance_lattice():
    return {
        "X": np.linspace(-6.0, 6.0, 121),
        "theta": np.linspace(0.0, np.pi, 64, endpoint=False),
        "target": make_grid(-5.0, 5.0, -5.0, 5.0, 101, 101),
    }


@pytest.fixture
def ground_operator():
    return fock_density(0, 16)


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "config"))
