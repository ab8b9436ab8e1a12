"""Phase-space grids, sampled functions and analytic test states (hbar = 1)."""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.ndimage import map_coordinates
from scipy.special import eval_laguerre

from tomostar.errors import (
    InvalidBounds,
    InvalidCount,
    InvalidInput,
    TruncatedSupportWarning,
)

logger = logging.getLogger(__name__)

STATE_KINDS = ("gaussian-classical", "coherent", "fock", "thermal")
# Boundary values above this fraction of the peak mean the grid cuts the support.
SUPPORT_TOL = 1e-6


@dataclass(frozen=True)
class PhaseSpaceGrid:
    q_min: float
    q_max: float
    p_min: float
    p_max: float
    n_q: int
    n_p: int

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / (self.n_q - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    @property
    def q(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_q, self.n_p)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (Q, P) arrays of shape (n_q, n_p)."""
        return np.meshgrid(self.q, self.p, indexing="ij")

    def contains(self, q, p) -> np.ndarray:
        return (q >= self.q_min) & (q <= self.q_max) & (p >= self.p_min) & (p <= self.p_max)

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseSpaceGrid":
        """Build from the grid JSON form {"q": [min, max, n], "p": [min, max, n]}."""
        try:
            q_min, q_max, n_q = data["q"]
            p_min, p_max, n_p = data["p"]
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInput(f"Bad grid description {data!r}: {e}") from e
        return make_grid(q_min, q_max, p_min, p_max, int(n_q), int(n_p))

    def to_dict(self) -> dict:
        return {"q": [self.q_min, self.q_max, self.n_q], "p": [self.p_min, self.p_max, self.n_p]}


def make_grid(q_min: float, q_max: float, p_min: float, p_max: float, n_q: int, n_p: int) -> PhaseSpaceGrid:
    """Create a uniform phase-space grid, validating bounds and counts."""
    if not q_min < q_max or not p_min < p_max:
        raise InvalidBounds(f"Grid bounds must be ordered: q [{q_min}, {q_max}], p [{p_min}, {p_max}]")
    if n_q < 2 or n_p < 2:
        raise InvalidCount(f"Grid needs at least 2 samples per axis, got ({n_q}, {n_p})")
    return PhaseSpaceGrid(float(q_min), float(q_max), float(p_min), float(p_max), int(n_q), int(n_p))


@dataclass(frozen=True, eq=False)
class PhaseSpaceFunction:
    """Complex function sampled on a grid, optionally backed by a closed form.

    When ``analytic`` is set, transforms evaluate it directly instead of
    interpolating the samples.
    """

    grid: PhaseSpaceGrid
    values: np.ndarray
    tag: str = "custom"
    params: dict = field(default_factory=dict)
    analytic: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise InvalidInput(f"Values of shape {values.shape} do not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)

    def __call__(self, q, p) -> np.ndarray:
        """Evaluate at arbitrary points; sampled functions vanish off the grid."""
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        if self.analytic is not None:
            return np.asarray(self.analytic(q, p), dtype=complex)
        return self.interpolate(q, p)

    def interpolate(self, q, p) -> np.ndarray:
        """Cubic-spline interpolation of the samples, zero outside the grid."""
        g = self.grid
        coords = np.stack([(np.ravel(q) - g.q_min) / g.dq, (np.ravel(p) - g.p_min) / g.dp])
        re = map_coordinates(self.values.real, coords, order=3, mode="constant", cval=0.0)
        im = map_coordinates(self.values.imag, coords, order=3, mode="constant", cval=0.0)
        out = (re + 1j * im).reshape(np.shape(q))
        return np.where(g.contains(q, p), out, 0.0)

    def scale(self) -> float:
        """Largest sampled modulus."""
        return float(np.max(np.abs(self.values)))

    def boundary_ratio(self) -> float:
        """Largest boundary modulus relative to the largest modulus overall."""
        v = np.abs(self.values)
        peak = v.max()
        if peak == 0:
            return 0.0
        edge = max(v[0, :].max(), v[-1, :].max(), v[:, 0].max(), v[:, -1].max())
        return float(edge / peak)

    def integral(self) -> complex:
        return complex(trapezoid(trapezoid(self.values, self.grid.p, axis=1), self.grid.q))

    def __add__(self, other: "PhaseSpaceFunction") -> "PhaseSpaceFunction":
        return _combine(self, other, 1.0, 1.0)

    def __mul__(self, factor: complex) -> "PhaseSpaceFunction":
        return _combine(self, None, factor, 0.0)

    __rmul__ = __mul__


def _combine(f: PhaseSpaceFunction, g: PhaseSpaceFunction | None, a: complex, b: complex) -> PhaseSpaceFunction:
    if g is not None and g.grid != f.grid:
        raise InvalidInput("Cannot combine functions sampled on different grids")
    values = a * f.values + (b * g.values if g is not None else 0.0)
    analytic = None
    if f.analytic is not None and (g is None or g.analytic is not None):
        fa, ga = f.analytic, (g.analytic if g is not None else None)

        def analytic(q, p):
            out = a * fa(q, p)
            return out + b * ga(q, p) if ga is not None else out

    return PhaseSpaceFunction(f.grid, values, "custom", {}, analytic)


@dataclass(frozen=True)
class StateSpec:
    """Provenance of a test state: which closed form and with what parameters."""

    kind: str
    mean: tuple[float, float] = (0.0, 0.0)
    cov: tuple[tuple[float, float], tuple[float, float]] = ((0.5, 0.0), (0.0, 0.5))
    alpha: complex = 0j
    n: int = 0
    nbar: float = 0.0

    def __post_init__(self):
        if self.kind not in STATE_KINDS:
            raise InvalidInput(f"Unknown state kind '{self.kind}', expected one of {STATE_KINDS}")
        if self.kind == "gaussian-classical":
            cov = np.asarray(self.cov, dtype=float)
            if cov.shape != (2, 2) or not np.allclose(cov, cov.T):
                raise InvalidInput(f"Covariance must be a symmetric 2x2 matrix, got {self.cov!r}")
            if np.any(np.linalg.eigvalsh(cov) <= 0):
                raise InvalidInput(f"Covariance must be positive definite, got {self.cov!r}")
        if self.kind == "fock" and (int(self.n) != self.n or self.n < 0):
            raise InvalidInput(f"Photon number must be a non-negative integer, got {self.n}")
        if self.kind == "thermal" and self.nbar < 0:
            raise InvalidInput(f"Mean occupation must be non-negative, got {self.nbar}")

    @property
    def center(self) -> tuple[float, float]:
        """Phase-space center, using alpha = (q + ip)/sqrt(2) for coherent states."""
        if self.kind == "coherent":
            return (np.sqrt(2.0) * self.alpha.real, np.sqrt(2.0) * self.alpha.imag)
        if self.kind == "gaussian-classical":
            return tuple(self.mean)
        return (0.0, 0.0)

    @classmethod
    def from_dict(cls, data: dict) -> "StateSpec":
        try:
            kind = data["kind"]
            if kind == "coherent":
                re, im = data.get("alpha", [0.0, 0.0])
                return cls(kind, alpha=complex(re, im))
            if kind == "fock":
                return cls(kind, n=int(data["n"]))
            if kind == "thermal":
                return cls(kind, nbar=float(data["nbar"]))
            if kind == "gaussian-classical":
                cov = tuple(tuple(float(c) for c in row) for row in data["cov"])
                return cls(kind, mean=tuple(float(m) for m in data["mean"]), cov=cov)
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInput(f"Bad state description {data!r}: {e}") from e
        raise InvalidInput(f"Unknown state kind {data.get('kind')!r}")

    def to_dict(self) -> dict:
        if self.kind == "coherent":
            return {"kind": self.kind, "alpha": [self.alpha.real, self.alpha.imag]}
        if self.kind == "fock":
            return {"kind": self.kind, "n": self.n}
        if self.kind == "thermal":
            return {"kind": self.kind, "nbar": self.nbar}
        return {"kind": self.kind, "mean": list(self.mean), "cov": [list(r) for r in self.cov]}


def state_density(spec: StateSpec) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Closed form of the classical density or Wigner function of a state."""
    if spec.kind == "coherent":
        q0, p0 = spec.center

        def density(q, p):
            return np.exp(-((q - q0) ** 2) - (p - p0) ** 2) / np.pi

    elif spec.kind == "fock":
        n = int(spec.n)

        def density(q, p):
            r2 = q**2 + p**2
            return (-1) ** n / np.pi * np.exp(-r2) * eval_laguerre(n, 2.0 * r2)

    elif spec.kind == "thermal":
        width = 2.0 * spec.nbar + 1.0

        def density(q, p):
            return np.exp(-(q**2 + p**2) / width) / (np.pi * width)

    else:
        mean = np.asarray(spec.mean, dtype=float)
        cov = np.asarray(spec.cov, dtype=float)
        inv = np.linalg.inv(cov)
        norm = 1.0 / (2.0 * np.pi * np.sqrt(np.linalg.det(cov)))

        def density(q, p):
            dq, dp = q - mean[0], p - mean[1]
            quad = inv[0, 0] * dq**2 + 2.0 * inv[0, 1] * dq * dp + inv[1, 1] * dp**2
            return norm * np.exp(-0.5 * quad)

    return density


def eval_state(spec: StateSpec, grid: PhaseSpaceGrid) -> PhaseSpaceFunction:
    """Sample a test state on a grid, keeping the closed form as backing."""
    density = state_density(spec)
    Q, P = grid.mesh()
    values = density(Q, P).astype(complex)
    return PhaseSpaceFunction(grid, values, spec.kind, spec.to_dict(), density)


def from_callable(fn: Callable, grid: PhaseSpaceGrid, tag: str = "custom") -> PhaseSpaceFunction:
    """Sample an arbitrary vectorized callable, keeping it as analytic backing."""
    Q, P = grid.mesh()
    return PhaseSpaceFunction(grid, np.asarray(fn(Q, P), dtype=complex), tag, {}, fn)


def translate(f: PhaseSpaceFunction, a: float, b: float) -> PhaseSpaceFunction:
    """Return g(q, p) = f(q - a, p - b) on the same grid."""
    def shifted(q, p):
        return f(np.asarray(q) - a, np.asarray(p) - b)

    return from_callable(shifted, f.grid, f.tag)


def weyl_to_wigner(f: PhaseSpaceFunction) -> PhaseSpaceFunction:
    """Wigner function of a state from its Weyl symbol (divide by 2 pi)."""
    return (1.0 / (2.0 * np.pi)) * f


def wigner_to_weyl(f: PhaseSpaceFunction) -> PhaseSpaceFunction:
    return (2.0 * np.pi) * f


def moments(f: PhaseSpaceFunction) -> tuple[float, float, float, np.ndarray]:
    """Trapezoid-rule norm, means and covariance of a sampled density."""
    ratio = f.boundary_ratio()
    if ratio > SUPPORT_TOL:
        logger.warning("Grid truncates the support: boundary/peak = %.3g", ratio)
        warnings.warn(
            f"boundary values reach {ratio:.3g} of the peak; moments are truncated",
            TruncatedSupportWarning,
            stacklevel=2,
        )
    g = f.grid
    Q, P = g.mesh()
    w = f.values.real

    def integrate(values):
        return float(trapezoid(trapezoid(values, g.p, axis=1), g.q))

    norm = integrate(w)
    mean_q = integrate(Q * w) / norm
    mean_p = integrate(P * w) / norm
    dq, dp = Q - mean_q, P - mean_p
    cov = np.array(
        [
            [integrate(dq * dq * w), integrate(dq * dp * w)],
            [integrate(dq * dp * w), integrate(dp * dp * w)],
        ]
    ) / norm
    return norm, mean_q, mean_p, cov
