"""Reference integrators used to check the closed forms and transforms.

All rules are deterministic. Every integrator returns its value together with an
error estimate obtained from a second, coarser (or less regularized) evaluation.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from tomostar.errors import InvalidInput, NonConvergent, ResolutionLimit

logger = logging.getLogger(__name__)

RULES = ("trapezoid", "gauss-legendre", "gauss-hermite")


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float


@dataclass(frozen=True)
class TestFunction:
    """Unit-mass Gaussian used to pair distribution-valued kernels.

    ``eps`` is the width in the X3 slot. ``eta`` optionally smears the direction
    (mu2, nu2) of the second kernel argument, which symplectic kernels need
    because they are delta-valued in the directions too.
    """

    __test__ = False  # keep pytest from collecting this class

    eps: float
    eta: float = 0.0

    def __post_init__(self):
        if self.eps <= 0:
            raise InvalidInput(f"Test function width must be positive, got {self.eps}")
        if self.eta < 0:
            raise InvalidInput(f"Direction width must be non-negative, got {self.eta}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x / self.eps) ** 2) / (np.sqrt(2.0 * np.pi) * self.eps)

    def fourier(self, k):
        """Return the integral of t(x) e^{ikx} over the real line."""
        k = np.asarray(k, dtype=float)
        return np.exp(-0.5 * (self.eps * k) ** 2)

    def mass(self) -> float:
        return float(integrate_nd(self, [(0.0, np.sqrt(2.0) * self.eps)], "gauss-hermite", 32).value.real)


def delta_smear(width: float) -> TestFunction:
    """Return a unit-mass Gaussian of the given width."""
    return TestFunction(eps=width)


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [a, b]."""
    knots, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * knots + 0.5 * (b + a), 0.5 * (b - a) * weights


def gauss_hermite(center: float, scale: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes for x = center + scale*t with the weight e^{-t^2} divided out.

    The returned weights integrate the full integrand, Gaussian included.
    """
    knots, weights = np.polynomial.hermite.hermgauss(n)
    return center + scale * knots, scale * weights * np.exp(knots**2)


def trapezoid_rule(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    knots = np.linspace(a, b, n)
    weights = np.full(n, (b - a) / (n - 1))
    weights[[0, -1]] *= 0.5
    return knots, weights


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Trapezoid weights for samples on a possibly nonuniform increasing axis."""
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        raise InvalidInput("Trapezoid weights need at least two samples")
    weights = np.empty(len(x))
    weights[1:-1] = 0.5 * (x[2:] - x[:-2])
    weights[0] = 0.5 * (x[1] - x[0])
    weights[-1] = 0.5 * (x[-1] - x[-2])
    return weights


def _rule_1d(rule: str, lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    if rule == "trapezoid":
        return trapezoid_rule(lo, hi, n)
    if rule == "gauss-legendre":
        return gauss_legendre(lo, hi, n)
    if rule == "gauss-hermite":
        return gauss_hermite(lo, hi, n)
    raise InvalidInput(f"Unknown quadrature rule '{rule}', expected one of {RULES}")


def tensor_rule(domain: Sequence[tuple[float, float]], rule: str, n_points: int):
    """Tensor-product nodes (list of d flat arrays) and flat weights."""
    rules = [_rule_1d(rule, lo, hi, n_points) for lo, hi in domain]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    weights = np.prod(np.stack(wgrids), axis=0)
    return [g.ravel() for g in grids], weights.ravel()


def _tensor_sum(fn: Callable, domain, rule: str, n_points: int) -> complex:
    nodes, weights = tensor_rule(domain, rule, n_points)
    return complex(np.sum(np.asarray(fn(*nodes)) * weights))


def integrate_nd(
    fn: Callable,
    domain: Sequence[tuple[float, float]],
    rule: str = "gauss-legendre",
    n_points: int = 32,
    tol: float | None = None,
) -> QuadratureResult:
    """Integrate ``fn(*coords)`` over a box with a tensor-product rule.

    For ``gauss-hermite`` each domain entry is ``(center, scale)`` and the
    integrand runs over the whole real axis; ``fn`` is the complete integrand,
    its Gaussian factor included. The error is the difference from the same
    rule at half the number of points.
    """
    value = _tensor_sum(fn, domain, rule, n_points)
    coarse = _tensor_sum(fn, domain, rule, max(2, n_points // 2))
    error = abs(value - coarse)
    logger.debug("integrate_nd %s n=%d: %s (err %.3g)", rule, n_points, value, error)
    if tol is not None and error > tol:
        raise ResolutionLimit(
            f"{rule} quadrature with {n_points} points differs from half resolution by {error:.3g}"
        )
    return QuadratureResult(value, error)


def richardson(values: Sequence[complex], levels: Sequence[float]) -> tuple[complex, float]:
    """Extrapolate values computed at damping levels sigma to sigma -> 0.

    The polynomial through the values in sigma^2 is evaluated at zero. The
    residual is the change between the full extrapolation and the one dropping
    the coarsest level.
    """
    x = np.asarray(levels, dtype=float) ** 2
    y = np.asarray(values, dtype=complex)
    if len(np.unique(x)) != len(x):
        raise InvalidInput(f"Damping levels must be distinct, got {list(levels)}")
    order = np.argsort(-x)
    x, y = x[order], y[order]

    if len(x) == 1:
        return complex(y[0]), float("inf")
    full = complex(BarycentricInterpolator(x, y)(0.0))
    reduced = complex(BarycentricInterpolator(x[1:], y[1:])(0.0))
    return complex(full), float(abs(full - reduced))


def oscillatory_integrate(
    fn: Callable,
    domain: Sequence[tuple[float, float]],
    damping_levels: Sequence[float] = (0.4, 0.2, 0.1),
    tol: float = 1e-3,
    n_points: int = 256,
    damped_axes: Sequence[int] | None = None,
) -> QuadratureResult:
    """Integrate an oscillatory ``fn`` regularized by e^{-sigma^2 |x|^2 / 2}.

    The box must be wide enough for the weakest damping to make the integrand
    negligible at its edges. Results at each sigma are extrapolated to sigma -> 0.
    """
    axes = range(len(domain)) if damped_axes is None else damped_axes
    nodes, weights = tensor_rule(domain, "gauss-legendre", n_points)
    base = np.asarray(fn(*nodes))
    r2 = sum(nodes[a] ** 2 for a in axes)
    values = []
    for sigma in damping_levels:
        values.append(complex(np.sum(base * np.exp(-0.5 * sigma**2 * r2) * weights)))
        logger.debug("damping sigma=%.3g -> %s", sigma, values[-1])
    value, residual = richardson(values, damping_levels)
    if residual > tol:
        raise NonConvergent(f"Damped extrapolation residual {residual:.3g} exceeds tolerance {tol:.3g}")
    return QuadratureResult(value, residual)


def gaussian_integral(M: np.ndarray, B: np.ndarray, C) -> np.ndarray:
    """Evaluate the integral over R^n of exp(-z.M.z/2 + B.z + C), batched.

    ``M`` has shape (..., n, n), complex symmetric with positive definite real
    part; ``B`` has shape (..., n). The square root of det M is taken as the
    product of principal roots of its eigenvalues, the branch continuous from
    real positive definite matrices.
    """
    M = np.asarray(M, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = M.shape[-1]
    eigvals = np.linalg.eigvals(M)
    sqrt_det = np.prod(np.sqrt(eigvals), axis=-1)
    solved = np.linalg.solve(M, B[..., None])[..., 0]
    exponent = 0.5 * np.sum(B * solved, axis=-1) + C
    return (2.0 * np.pi) ** (n / 2) / sqrt_det * np.exp(exponent)

