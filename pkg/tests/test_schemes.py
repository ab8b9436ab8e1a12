import numpy as np
import pytest

from tomostar.config import DEFAULT_CONFIG
from tomostar.errors import InvalidInput
from tomostar.quadrature import TestFunction
from tomostar.schemes import GaussianForm, RidgeForm, SchemeKernel, custom_kernel, dequantizer, quantizer
from tomostar.symplectic import TomographicPoint
from tomostar.thick import WindowFunction

x = TomographicPoint(0.7, 0.6, -0.8)
q, p = np.array([0.1, -1.2, 2.0]), np.array([0.5, 0.3, -0.4])


def test_symplectic_dequantizer_needs_test():
    phi = dequantizer("symplectic")
    assert phi.is_delta
    test = TestFunction(0.2)
    np.testing.assert_allclose(phi(q, p, x, test), test(x.X - x.mu * q - x.nu * p))
    with pytest.raises(InvalidInput):
        phi(q, p, x)


def test_thick_dequantizer_is_window():
    Xi = WindowFunction("gaussian", 0.5)
    phi = dequantizer("thick", Xi)
    assert not phi.is_delta
    np.testing.assert_allclose(phi(q, p, x), Xi(x.X - x.mu * q - x.nu * p))


def test_quadratic_dequantizer_level():
    form = dequantizer("quadratic").form(x)
    assert isinstance(form, RidgeForm)
    np.testing.assert_allclose(form.level(q, p), (q - x.mu) ** 2 + (p - x.nu) ** 2)


def test_symplectic_quantizer():
    chi = quantizer("symplectic")
    expected = np.exp(1j * (x.X - x.mu * q - x.nu * p)) / (4.0 * np.pi**2)
    np.testing.assert_allclose(chi(q, p, x), expected)


def test_thick_quantizer_carries_normalization():
    Xi = WindowFunction("rectangular", 2.0)
    ratio = quantizer("thick", Xi)(q, p, x) / quantizer("symplectic")(q, p, x)
    np.testing.assert_allclose(ratio, Xi.normalization)


def test_quadratic_quantizer():
    chi = quantizer("quadratic")
    c = DEFAULT_CONFIG["inverse_constant"]
    expected = c / np.pi * np.exp(1j * (x.X - (q - x.mu) ** 2 - (p - x.nu) ** 2))
    np.testing.assert_allclose(chi(q, p, x), expected)
    assert quantizer("quadratic", constant=2.0).inverse_constant == 2.0


def test_custom_kernel_uses_builder():
    form = GaussianForm(np.eye(2), np.zeros(2), 0.0, 1.0)
    chi = custom_kernel("quantizer", lambda point: form)
    np.testing.assert_allclose(chi(q, p, x), np.exp(-0.5 * (q * q + p * p)))


@pytest.mark.parametrize(
    "args",
    [("bogus", "quantizer"), ("symplectic", "inverse"), ("thick", "dequantizer"), ("custom", "quantizer")],
)
def test_rejects_bad_kernels(args):
    with pytest.raises(InvalidInput):
        SchemeKernel(*args)
