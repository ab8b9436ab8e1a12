"""Thick tomograms: lines replaced by strips weighted with a window Xi(Y) >= 0."""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from tomostar.errors import InvalidInput, SingularWindow, UnresolvedWindow
from tomostar.phase_space import PhaseSpaceFunction
from tomostar.quadrature import gauss_hermite, gauss_legendre, trapezoid_weights
from tomostar.symplectic import (
    Tomogram,
    TomographicPoint,
    radon_forward_grid,
    radon_forward_points,
)

logger = logging.getLogger(__name__)

WINDOW_KINDS = ("rectangular", "gaussian", "custom")
SINGULAR_TOL = 1e-12
RESOLUTION_TOL = 1e-2


@dataclass(frozen=True, eq=False)
class WindowFunction:
    """Non-negative window. ``width`` is the full width for rectangular windows
    and the standard deviation of the unit-mass Gaussian otherwise."""

    kind: str
    width: float = 0.0
    Y: np.ndarray | None = None
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise InvalidInput(f"Unknown window kind '{self.kind}', expected one of {WINDOW_KINDS}")
        if self.kind == "custom":
            if self.Y is None or self.samples is None:
                raise InvalidInput("Custom windows need sample positions and values")
            Y = np.asarray(self.Y, dtype=float)
            samples = np.asarray(self.samples, dtype=float)
            if Y.shape != samples.shape or Y.ndim != 1 or len(Y) < 2:
                raise InvalidInput("Custom window samples must be two 1-D arrays of equal length >= 2")
            if np.any(np.diff(Y) <= 0):
                raise InvalidInput("Custom window positions must be strictly increasing")
            if np.any(samples < 0):
                raise InvalidInput("Window values must be non-negative")
            object.__setattr__(self, "Y", Y)
            object.__setattr__(self, "samples", samples)
        elif self.width <= 0:
            raise InvalidInput(f"{self.kind} window width must be positive, got {self.width}")

    def __call__(self, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        if self.kind == "rectangular":
            return np.where(np.abs(Y) <= 0.5 * self.width, 1.0, 0.0)
        if self.kind == "gaussian":
            return np.exp(-0.5 * (Y / self.width) ** 2) / (np.sqrt(2.0 * np.pi) * self.width)
        return np.interp(Y, self.Y, self.samples, left=0.0, right=0.0)

    def fourier(self, k) -> np.ndarray:
        """Return the integral of Xi(z) e^{ikz} dz."""
        k = np.asarray(k, dtype=float)
        if self.kind == "rectangular":
            return self.width * np.sinc(k * self.width / (2.0 * np.pi)) + 0j
        if self.kind == "gaussian":
            return np.exp(-0.5 * (self.width * k) ** 2) + 0j
        phases = np.exp(1j * np.multiply.outer(k, self.Y))
        return trapezoid(phases * self.samples, self.Y, axis=-1)

    @cached_property
    def normalization(self) -> complex:
        return window_normalization(self)

    def nodes(self, n: int = 64) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes and weights w_j with sum w_j g(Y_j) ~ integral of Xi(Y) g(Y)."""
        if self.kind == "rectangular":
            Y, w = gauss_legendre(-0.5 * self.width, 0.5 * self.width, n)
            return Y, w
        if self.kind == "gaussian":
            Y, w = gauss_hermite(0.0, np.sqrt(2.0) * self.width, n)
            return Y, w * self(Y)
        return self.Y, trapezoid_weights(self.Y) * self.samples

    @classmethod
    def from_dict(cls, data: dict) -> "WindowFunction":
        try:
            kind = data["kind"]
            if kind == "rectangular":
                return cls(kind, width=float(data["delta"]))
            if kind == "gaussian":
                return cls(kind, width=float(data["sigma"]))
            if kind == "custom":
                return cls(kind, Y=np.asarray(data["Y"], dtype=float), samples=np.asarray(data["Xi"], dtype=float))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInput(f"Bad window description {data!r}: {e}") from e
        raise InvalidInput(f"Unknown window kind {data.get('kind')!r}")

    def to_dict(self) -> dict:
        if self.kind == "rectangular":
            return {"kind": self.kind, "delta": self.width}
        if self.kind == "gaussian":
            return {"kind": self.kind, "sigma": self.width}
        return {"kind": self.kind, "Y": self.Y.tolist(), "Xi": self.samples.tolist()}


def window_normalization(Xi: WindowFunction) -> complex:
    """N = 1 / integral of Xi(z) e^{iz} dz."""
    transform = complex(Xi.fourier(1.0))
    if abs(transform) < SINGULAR_TOL:
        raise SingularWindow(f"Window {Xi.to_dict()} has a vanishing Fourier transform at k = 1")
    return 1.0 / transform


def thick_forward(f: PhaseSpaceFunction, Xi: WindowFunction, x: TomographicPoint, n_nodes: int = 64):
    """Integral of f(q, p) Xi(X - mu*q - nu*p), as Xi smearing of the ideal tomogram in X."""
    x.require_direction()
    Y, weights = Xi.nodes(n_nodes)
    ideal = radon_forward_points(f, x.X - Y, x.mu, x.nu)
    value = complex(np.sum(weights * ideal))
    return value.real if value.imag == 0 else value


def _check_resolved(Xi: WindowFunction, dX: float, tol: float = RESOLUTION_TOL) -> None:
    """Resample a custom window on multiples of dX and require it to keep its mass and shape."""
    if Xi.kind != "custom":
        return
    mass = trapezoid(Xi.samples, Xi.Y)
    if mass <= 0:
        return
    lattice = dX * np.arange(np.ceil(Xi.Y[0] / dX), np.floor(Xi.Y[-1] / dX) + 1)
    if len(lattice) < 2:
        raise UnresolvedWindow(
            f"Window of width {Xi.Y[-1] - Xi.Y[0]:.3g} spans fewer than two X steps of {dX:.3g}"
        )
    resampled = Xi(lattice)
    lost = abs(trapezoid(resampled, lattice) - mass) / mass
    restored = np.interp(Xi.Y, lattice, resampled, left=0.0, right=0.0)
    distortion = trapezoid(np.abs(restored - Xi.samples), Xi.Y) / mass
    if max(lost, distortion) > tol:
        raise UnresolvedWindow(
            f"Window varies faster than the X spacing {dX:.3g}: resampling changes its mass by {lost:.3g} "
            f"and its shape by {distortion:.3g}"
        )


def _smear_row(X: np.ndarray, row: np.ndarray, Xi: WindowFunction, n_nodes: int) -> np.ndarray:
    spline = CubicSpline(X, row)
    if Xi.kind == "rectangular":
        lo = np.clip(X - 0.5 * Xi.width, X[0], X[-1])
        hi = np.clip(X + 0.5 * Xi.width, X[0], X[-1])
        return np.array([spline.integrate(a, b) if a < b else 0.0 for a, b in zip(lo, hi)])
    Y, weights = Xi.nodes(n_nodes)
    shifted = X[:, None] - Y[None, :]
    inside = (shifted >= X[0]) & (shifted <= X[-1])
    values = np.where(inside, spline(np.clip(shifted, X[0], X[-1])), 0.0)
    return values @ weights


def thick_from_ideal(w: Tomogram, Xi: WindowFunction, n_nodes: int = 64) -> Tomogram:
    """Convolve every ideal slice in X with the window.

    The slice is taken as zero outside its X range.
    """
    if w.scheme != "symplectic":
        raise InvalidInput(f"thick_from_ideal expects a symplectic tomogram, got '{w.scheme}'")
    _check_resolved(Xi, w.dX)
    values = np.array([_smear_row(w.X, row, Xi, n_nodes) for row in np.atleast_2d(w.values)])
    return w.with_values(values.reshape(w.values.shape), scheme="thick", window=Xi)


def thick_forward_grid(f: PhaseSpaceFunction, Xi: WindowFunction, X_grid, theta_grid) -> Tomogram:
    tomogram = thick_from_ideal(radon_forward_grid(f, X_grid, theta_grid), Xi)
    logger.info("Built thick tomogram with %s window", Xi.kind)
    return tomogram
