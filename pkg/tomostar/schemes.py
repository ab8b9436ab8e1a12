"""Dequantizer and quantizer functions of the tomographic schemes.

Every scheme function of z = (q, p) at a tomogram point x has one of two shapes:

* a Gaussian form ``amplitude * exp(-z.A.z/2 + b.z + c0)`` (quantizers), or
* a ridge form ``Xi(X - L(z))`` with ``L(z) = z.P.z/2 + l.z + l0`` (dequantizers),
  where Xi is a window or, for ideal schemes, the delta function.

Kernel composition works on these forms, operators are built from them.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from tomostar.config import DEFAULT_CONFIG
from tomostar.errors import InvalidInput
from tomostar.symplectic import TomographicPoint
from tomostar.thick import WindowFunction

SCHEME_NAMES = ("symplectic", "thick", "quadratic", "custom")
ROLES = ("dequantizer", "quantizer")


@dataclass(frozen=True)
class GaussianForm:
    A: np.ndarray
    b: np.ndarray
    c0: complex
    amplitude: complex

    def __call__(self, q, p) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        A = self.A
        quad = A[0, 0] * q * q + (A[0, 1] + A[1, 0]) * q * p + A[1, 1] * p * p
        return self.amplitude * np.exp(-0.5 * quad + self.b[0] * q + self.b[1] * p + self.c0)


def _delta_profile(k):
    return np.ones_like(np.asarray(k, dtype=float), dtype=complex)


@dataclass(frozen=True)
class RidgeForm:
    """Xi(X - L(z)). ``profile(k)`` is the integral of Xi(u) e^{-iku} du;
    ``window`` is None for the delta function."""

    P: np.ndarray
    l: np.ndarray
    l0: float
    X: float
    profile: Callable = _delta_profile
    window: Callable | None = None

    def level(self, q, p) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        P = self.P
        quad = P[0, 0] * q * q + (P[0, 1] + P[1, 0]) * q * p + P[1, 1] * p * p
        return 0.5 * quad + self.l[0] * q + self.l[1] * p + self.l0

    def __call__(self, q, p, test=None) -> np.ndarray:
        u = self.X - self.level(q, p)
        if self.window is not None:
            return self.window(u)
        if test is None:
            raise InvalidInput("A delta-valued dequantizer can only be evaluated against a test function")
        return test(u)


@dataclass(frozen=True)
class SchemeKernel:
    """The dequantizer (role ``dequantizer``) or quantizer function of a scheme.

    Custom kernels supply ``builder``, a callable mapping a TomographicPoint
    to a GaussianForm or RidgeForm.
    """

    scheme: str
    role: str
    window: WindowFunction | None = None
    constant: float | None = None
    builder: Callable[[TomographicPoint], GaussianForm | RidgeForm] | None = None

    def __post_init__(self):
        if self.scheme not in SCHEME_NAMES:
            raise InvalidInput(f"Unknown scheme '{self.scheme}', expected one of {SCHEME_NAMES}")
        if self.role not in ROLES:
            raise InvalidInput(f"Unknown kernel role '{self.role}', expected one of {ROLES}")
        if self.scheme == "thick" and self.window is None:
            raise InvalidInput("The thick scheme needs a window")
        if self.scheme == "custom" and self.builder is None:
            raise InvalidInput("Custom scheme kernels need a form builder")

    @property
    def is_delta(self) -> bool:
        return self.role == "dequantizer" and self.scheme in ("symplectic", "quadratic")

    @property
    def inverse_constant(self) -> float:
        return DEFAULT_CONFIG["inverse_constant"] if self.constant is None else self.constant

    def form(self, x: TomographicPoint) -> GaussianForm | RidgeForm:
        if self.scheme == "custom":
            return self.builder(x)
        m = np.array([x.mu, x.nu], dtype=float)
        if self.role == "quantizer":
            if self.scheme == "quadratic":
                return GaussianForm(
                    2j * np.eye(2), 2j * m, 1j * x.X - 1j * float(m @ m), self.inverse_constant / np.pi
                )
            amplitude = 1.0 / (4.0 * np.pi**2)
            if self.scheme == "thick":
                amplitude = self.window.normalization * amplitude
            return GaussianForm(np.zeros((2, 2), dtype=complex), -1j * m, 1j * x.X, amplitude)
        if self.scheme == "quadratic":
            return RidgeForm(2.0 * np.eye(2), -2.0 * m, float(m @ m), x.X)
        if self.scheme == "thick":
            Xi = self.window
            return RidgeForm(np.zeros((2, 2)), m, 0.0, x.X, lambda k: Xi.fourier(-np.asarray(k)), Xi)
        return RidgeForm(np.zeros((2, 2)), m, 0.0, x.X)

    def __call__(self, q, p, x: TomographicPoint, test=None) -> np.ndarray:
        form = self.form(x)
        if isinstance(form, RidgeForm):
            return form(q, p, test)
        return form(q, p)


def dequantizer(scheme: str, window: WindowFunction | None = None) -> SchemeKernel:
    return SchemeKernel(scheme, "dequantizer", window)


def quantizer(scheme: str, window: WindowFunction | None = None, constant: float | None = None) -> SchemeKernel:
    return SchemeKernel(scheme, "quantizer", window, constant)


def custom_kernel(role: str, builder: Callable) -> SchemeKernel:
    return SchemeKernel("custom", role, builder=builder)
