"""Tomograms built from circles: w(X, mu, nu) is the integral of f over
(q - mu)^2 + (p - nu)^2 = X, and its oscillatory inverse."""

import logging

import numpy as np
from scipy.integrate import trapezoid

from tomostar.config import DEFAULT_CONFIG
from tomostar.errors import CalibrationUnstable, InvalidInput, NonConvergent, TruncatedSupport
from tomostar.phase_space import (
    PhaseSpaceFunction,
    PhaseSpaceGrid,
    StateSpec,
    SUPPORT_TOL,
    eval_state,
    make_grid,
)
from tomostar.quadrature import richardson, trapezoid_weights
from tomostar.symplectic import Tomogram, TomographicPoint

logger = logging.getLogger(__name__)

N_PHI = 96


def quadratic_tomogram(X, mu, nu, values) -> Tomogram:
    return Tomogram("quadratic", {"mu": mu, "nu": nu, "X": X}, values)


def _check_circle_support(f: PhaseSpaceFunction, q: np.ndarray, p: np.ndarray, values: np.ndarray) -> None:
    outside = ~f.grid.contains(q, p)
    if not np.any(outside):
        return
    if f.analytic is None:
        ratio = f.boundary_ratio()
        if ratio > SUPPORT_TOL:
            raise TruncatedSupport(f"Circles leave a grid whose boundary reaches {ratio:.3g} of the peak")
        return
    scale = f.scale()
    leak = np.max(np.abs(values[outside])) if scale > 0 else 0.0
    if leak > SUPPORT_TOL * scale:
        raise TruncatedSupport(f"Circles leave the grid where the function is still {leak:.3g}")


def circle_forward_points(f: PhaseSpaceFunction, X, mu, nu, n_phi: int = N_PHI) -> np.ndarray:
    """Vectorized circle transform over broadcastable X, mu, nu; zero for X <= 0."""
    X, mu, nu = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (X, mu, nu)))
    radius = np.sqrt(np.clip(X, 0.0, None))[..., None]
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    q = mu[..., None] + radius * np.cos(phi)
    p = nu[..., None] + radius * np.sin(phi)
    values = f(q, p)
    _check_circle_support(f, q, p, values)
    # delta(X - r^2) carries the Jacobian 1/2; periodic trapezoid in phi
    average = 0.5 * (2.0 * np.pi / n_phi) * values.sum(axis=-1)
    return np.where(X > 0, average, 0.0)


def circle_forward(f: PhaseSpaceFunction, x: TomographicPoint, n_phi: int = N_PHI):
    """(1/2) times the integral over phi of f(mu + sqrt(X) cos phi, nu + sqrt(X) sin phi)."""
    value = complex(circle_forward_points(f, x.X, x.mu, x.nu, n_phi))
    return value.real if value.imag == 0 else value


def circle_forward_grid(f: PhaseSpaceFunction, X_grid, mu_grid, nu_grid, n_phi: int = N_PHI) -> Tomogram:
    X_grid = np.asarray(X_grid, dtype=float)
    nu_grid = np.asarray(nu_grid, dtype=float)
    rows = [
        circle_forward_points(f, X_grid[None, :], mu, nu_grid[:, None], n_phi)
        for mu in np.asarray(mu_grid, dtype=float)
    ]
    values = np.array(rows)
    if np.allclose(values.imag, 0.0):
        values = values.real
    logger.info(
        "Built quadratic tomogram: %d x %d centers x %d X samples", len(mu_grid), len(nu_grid), len(X_grid)
    )
    return quadratic_tomogram(X_grid, mu_grid, nu_grid, values)


def slice_transforms(w: Tomogram, x_cutoff_rel: float | None = None) -> np.ndarray:
    """g(mu, nu) = integral over X > 0 of w(X, mu, nu) e^{iX}.

    Every slice must have decayed below ``x_cutoff_rel`` of the tomogram's
    peak by its last sample. The first interval uses the one-sided limit X -> 0+.
    """
    x_cutoff_rel = DEFAULT_CONFIG["x_cutoff_rel"] if x_cutoff_rel is None else x_cutoff_rel
    positive = w.X > 0
    if positive.sum() < 2:
        raise InvalidInput("Quadratic tomogram needs at least two samples with X > 0")
    X = w.X[positive]
    values = np.asarray(w.values)[..., positive]
    peak = np.max(np.abs(values))
    if peak == 0:
        return np.zeros(values.shape[:-1], dtype=complex)
    unresolved = np.abs(values[..., -1]) > x_cutoff_rel * peak
    if unresolved.any():
        needed = _required_extent(X, values[unresolved], x_cutoff_rel * peak)
        raise NonConvergent(
            f"{unresolved.sum()} of {unresolved.size} slices are above {x_cutoff_rel:g} of the peak "
            f"at X = {X[-1]:.3g}; extend the X lattice to about {needed:.3g}"
        )
    integrand = values * np.exp(1j * X)
    g = trapezoid(integrand, X, axis=-1)
    edge = values[..., 0] + (values[..., 0] - values[..., 1]) * X[0] / (X[1] - X[0])
    g += 0.5 * X[0] * (edge + integrand[..., 0])
    return g


def _required_extent(X: np.ndarray, tails: np.ndarray, floor: float) -> float:
    """Extrapolate the slowest slice tail as an exponential down to ``floor``."""
    start = int(0.75 * (len(X) - 1))
    late = np.abs(tails[..., -1])
    early = np.maximum(np.abs(tails[..., start]), late)
    span = X[-1] - X[start]
    if span <= 0:
        return 2.0 * X[-1]
    rate = np.log(early / late) / span
    if np.any(rate <= 0):
        return 2.0 * X[-1]
    return float(np.max(X[-1] + np.log(late / floor) / rate))


def quadratic_inverse(
    w: Tomogram,
    target_grid: PhaseSpaceGrid,
    damping_levels=None,
    c: float | None = None,
    tol: float | None = None,
    x_cutoff_rel: float | None = None,
) -> PhaseSpaceFunction:
    """f(z) = (c/pi) * integral of w(X, m) e^{i(X - |z - m|^2)} dX dm.

    The m integral is damped by e^{-sigma^2 |m|^2 / 2} and extrapolated to
    sigma -> 0. With c = 1/pi the map inverts ``circle_forward_grid``.
    """
    if w.scheme != "quadratic":
        raise InvalidInput(f"quadratic_inverse expects a quadratic tomogram, got '{w.scheme}'")
    damping_levels = DEFAULT_CONFIG["damping_levels"] if damping_levels is None else damping_levels
    c = DEFAULT_CONFIG["inverse_constant"] if c is None else c
    tol = DEFAULT_CONFIG["inverse_boundary_tol"] if tol is None else tol
    if any(s <= 0 for s in damping_levels):
        raise InvalidInput(f"Damping levels must be positive, got {damping_levels}")

    g = slice_transforms(w, x_cutoff_rel)
    scale = np.max(np.abs(g))
    if scale == 0:
        return PhaseSpaceFunction(target_grid, np.zeros(target_grid.shape), "reconstructed")

    rim = np.concatenate([g[0], g[-1], g[:, 0], g[:, -1]])
    ratio = np.max(np.abs(rim)) / scale
    if ratio > tol:
        raise NonConvergent(
            f"Slice transform is still {ratio:.3g} of its peak on the edge of the center lattice"
        )

    mu, nu = w.axes["mu"], w.axes["nu"]
    M, N = np.meshgrid(mu, nu, indexing="ij")
    weighted = g * np.exp(-1j * (M**2 + N**2)) * np.outer(trapezoid_weights(mu), trapezoid_weights(nu))
    Q, P = target_grid.mesh()
    # e^{-i|z - m|^2} factorizes into e^{-i|z|^2} e^{2i q mu} e^{2i p nu} e^{-i|m|^2}
    E_q = np.exp(2j * np.outer(target_grid.q, mu))
    E_p = np.exp(2j * np.outer(target_grid.p, nu))
    prefactor = (c / np.pi) * np.exp(-1j * (Q**2 + P**2))

    values = []
    for sigma in damping_levels:
        damped = weighted * np.exp(-0.5 * sigma**2 * (M**2 + N**2))
        values.append(prefactor * (E_q @ damped @ E_p.T))
        logger.debug("Damping sigma=%.3g: peak %.6g", sigma, np.max(np.abs(values[-1])))

    stacked = np.stack(values)
    result = np.empty(target_grid.shape, dtype=complex)
    residual = 0.0
    for index in np.ndindex(*target_grid.shape):
        result[index], r = richardson(stacked[(slice(None),) + index], damping_levels)
        residual = max(residual, r)
    peak = np.max(np.abs(result))
    if peak > 0 and residual > tol * peak:
        raise NonConvergent(f"Damping extrapolation residual {residual:.3g} exceeds {tol:.3g} of the peak")
    logger.info("Quadratic inverse on %dx%d grid (c=%.6g)", target_grid.n_q, target_grid.n_p, c)
    return PhaseSpaceFunction(target_grid, result, "reconstructed")


def calibration_lattice() -> dict:
    """Default lattices for the round-trip calibration.

    Slices centered at the lattice corners need X up to about 160 to decay.
    """
    return {
        "X": np.linspace(0.0, 160.0, 801),
        "mu": np.linspace(-5.0, 5.0, 41),
        "nu": np.linspace(-5.0, 5.0, 41),
        "target": make_grid(-3.0, 3.0, -3.0, 3.0, 41, 41),
    }


def round_trip(
    spec: StateSpec,
    c: float = 1.0,
    lattice: dict | None = None,
    damping_levels=None,
    x_cutoff_rel: float | None = None,
) -> tuple[PhaseSpaceFunction, PhaseSpaceFunction]:
    """Forward then invert a test state; returns (reconstruction, reference) on the target grid."""
    lattice = lattice or calibration_lattice()
    source = eval_state(spec, make_grid(-9.0, 9.0, -9.0, 9.0, 37, 37))
    w = circle_forward_grid(source, lattice["X"], lattice["mu"], lattice["nu"])
    reconstructed = quadratic_inverse(
        w, lattice["target"], damping_levels=damping_levels, c=c, x_cutoff_rel=x_cutoff_rel
    )
    return reconstructed, eval_state(spec, lattice["target"])


def fit_constant(reconstructed: PhaseSpaceFunction, reference: PhaseSpaceFunction) -> float:
    """Least-squares scalar c minimizing |c * reconstructed - reference|."""
    r = reconstructed.values.ravel()
    f = reference.values.ravel()
    return float(np.real(np.vdot(r, f)) / np.real(np.vdot(r, r)))


def calibrate_inverse_constant(
    reference: StateSpec | None = None,
    check: StateSpec | None = None,
    lattice: dict | None = None,
    tol: float | None = None,
    damping_levels=None,
    x_cutoff_rel: float | None = None,
) -> float:
    """Fit the inverse normalization on ``reference`` and confirm it on ``check``.

    Both default to coherent states, at the origin and at alpha = 1.
    """
    reference = reference or StateSpec("coherent", alpha=0j)
    check = check or StateSpec("coherent", alpha=1 + 0j)
    tol = DEFAULT_CONFIG["calibration_tol"] if tol is None else tol
    c_ref = fit_constant(*round_trip(reference, 1.0, lattice, damping_levels, x_cutoff_rel))
    c_check = fit_constant(*round_trip(check, 1.0, lattice, damping_levels, x_cutoff_rel))
    spread = abs(c_ref - c_check) / abs(c_ref)
    logger.info("Calibrated inverse constant %.6g (check %.6g, spread %.3g)", c_ref, c_check, spread)
    if spread > tol:
        raise CalibrationUnstable(
            f"Inverse constant {c_ref:.6g} from {reference.kind} differs from {c_check:.6g} by {spread:.1%}"
        )
    return c_ref
