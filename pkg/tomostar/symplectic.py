"""Symplectic tomograms: the Radon transform of phase-space functions and its inverse.

A tomogram point x = (X, mu, nu) labels the line mu*q + nu*p = X. Directions are
stored as angles theta with (mu, nu) = (cos theta, sin theta); other scalings
follow from w(lX, l*mu, l*nu) = w(X, mu, nu) / |l|.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from tomostar.config import DEFAULT_CONFIG
from tomostar.errors import (
    AliasedSpectrum,
    DegenerateDirection,
    InsufficientAngles,
    InvalidInput,
    SingularWindow,
    TruncatedSupport,
)
from tomostar.phase_space import PhaseSpaceFunction, PhaseSpaceGrid, SUPPORT_TOL
from tomostar.quadrature import TestFunction, integrate_nd

logger = logging.getLogger(__name__)

SCHEMES = ("symplectic", "thick", "quadratic")
SCHEME_AXES = {
    "symplectic": ("theta", "X"),
    "thick": ("theta", "X"),
    "quadratic": ("mu", "nu", "X"),
}
LATTICE_RTOL = 1e-6
WINDOW_FLOOR = 1e-3
WINDOW_EDGE_TOL = 1e-2


@dataclass(frozen=True)
class TomographicPoint:
    X: float
    mu: float
    nu: float

    @property
    def norm(self) -> float:
        return float(np.hypot(self.mu, self.nu))

    def require_direction(self) -> None:
        if self.mu == 0 and self.nu == 0:
            raise DegenerateDirection(f"Direction (mu, nu) = (0, 0) does not define a line at X = {self.X}")

    @classmethod
    def from_angle(cls, X: float, theta: float) -> "TomographicPoint":
        return cls(float(X), float(np.cos(theta)), float(np.sin(theta)))


@dataclass(frozen=True, eq=False)
class Tomogram:
    """Tomogram values on a structured lattice.

    ``axes`` maps axis names to 1-D arrays in the order given by
    ``SCHEME_AXES[scheme]``; ``values`` has the matching shape. Thick
    tomograms keep the window that produced them.
    """

    scheme: str
    axes: dict[str, np.ndarray]
    values: np.ndarray
    window: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidInput(f"Unknown tomogram scheme '{self.scheme}', expected one of {SCHEMES}")
        names = SCHEME_AXES[self.scheme]
        if set(self.axes) != set(names):
            raise InvalidInput(f"{self.scheme} tomogram needs axes {names}, got {tuple(self.axes)}")
        axes = {name: np.asarray(self.axes[name], dtype=float) for name in names}
        values = np.asarray(self.values)
        shape = tuple(len(axes[name]) for name in names)
        if values.shape != shape:
            raise InvalidInput(f"Tomogram values of shape {values.shape} do not match axes {shape}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)

    @property
    def X(self) -> np.ndarray:
        return self.axes["X"]

    @property
    def dX(self) -> float:
        return float(self.X[1] - self.X[0])

    @property
    def points(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flat (X, mu, nu) arrays in the same order as ``values.ravel()``."""
        if self.scheme == "quadratic":
            mu, nu, X = np.meshgrid(self.axes["mu"], self.axes["nu"], self.X, indexing="ij")
            return X.ravel(), mu.ravel(), nu.ravel()
        theta, X = np.meshgrid(self.axes["theta"], self.X, indexing="ij")
        return X.ravel(), np.cos(theta).ravel(), np.sin(theta).ravel()

    def slice_masses(self) -> np.ndarray:
        """Integral over X of every fixed-direction slice."""
        return trapezoid(self.values, self.X, axis=-1)

    def with_values(self, values: np.ndarray, scheme: str | None = None, window=None) -> "Tomogram":
        scheme = scheme or self.scheme
        if window is None and scheme == self.scheme:
            window = self.window
        return Tomogram(scheme, dict(self.axes), values, window, dict(self.meta))


def symplectic_tomogram(X, theta, values, scheme: str = "symplectic", window=None) -> Tomogram:
    return Tomogram(scheme, {"theta": theta, "X": X}, values, window)


def _require_support(f: PhaseSpaceFunction) -> None:
    ratio = f.boundary_ratio()
    if ratio > SUPPORT_TOL:
        raise TruncatedSupport(
            f"Function reaches {ratio:.3g} of its peak on the grid boundary; line integrals would be cut off"
        )


def _line_nodes(grid: PhaseSpaceGrid, step_factor: float) -> np.ndarray:
    radius = np.hypot(max(abs(grid.q_min), abs(grid.q_max)), max(abs(grid.p_min), abs(grid.p_max)))
    step = step_factor * min(grid.dq, grid.dp)
    n = int(np.ceil(2.0 * radius / step)) + 1
    return np.linspace(-radius, radius, n)


def _line_integrals(f: PhaseSpaceFunction, X, mu, nu, step_factor: float) -> np.ndarray:
    X, mu, nu = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (X, mu, nu)))
    r = np.hypot(mu, nu)
    if np.any(r == 0):
        raise DegenerateDirection("Direction (mu, nu) = (0, 0) does not define a line")
    s = X / r
    cos, sin = mu / r, nu / r
    u = _line_nodes(f.grid, step_factor)
    q = s[..., None] * cos[..., None] - u * sin[..., None]
    p = s[..., None] * sin[..., None] + u * cos[..., None]
    return trapezoid(f(q, p), u, axis=-1) / r


def radon_forward(f: PhaseSpaceFunction, x: TomographicPoint, step_factor: float | None = None) -> complex:
    """Line integral of f over mu*q + nu*p = X, divided by |(mu, nu)|.

    Uses the closed form of f when it has one, cubic interpolation of the
    samples otherwise.
    """
    x.require_direction()
    _require_support(f)
    step_factor = DEFAULT_CONFIG["radon_step_factor"] if step_factor is None else step_factor
    value = complex(_line_integrals(f, x.X, x.mu, x.nu, step_factor))
    return value.real if value.imag == 0 else value


def radon_forward_points(f: PhaseSpaceFunction, X, mu, nu, step_factor: float | None = None) -> np.ndarray:
    """Vectorized radon_forward over broadcastable X, mu, nu arrays."""
    _require_support(f)
    step_factor = DEFAULT_CONFIG["radon_step_factor"] if step_factor is None else step_factor
    return _line_integrals(f, X, mu, nu, step_factor)


def radon_forward_grid(
    f: PhaseSpaceFunction,
    X_grid,
    theta_grid,
    step_factor: float | None = None,
) -> Tomogram:
    """Tomogram of f on an X x theta lattice with (mu, nu) = (cos theta, sin theta)."""
    _require_support(f)
    step_factor = DEFAULT_CONFIG["radon_step_factor"] if step_factor is None else step_factor
    X_grid = np.asarray(X_grid, dtype=float)
    theta_grid = np.asarray(theta_grid, dtype=float)
    rows = [
        _line_integrals(f, X_grid, np.cos(theta), np.sin(theta), step_factor)
        for theta in theta_grid
    ]
    values = np.array(rows)
    if np.allclose(values.imag, 0.0):
        values = values.real
    logger.info("Built symplectic tomogram: %d angles x %d X samples", len(theta_grid), len(X_grid))
    return symplectic_tomogram(X_grid, theta_grid, values)


def radon_smeared(f: PhaseSpaceFunction, x: TomographicPoint, test: TestFunction, n_points: int = 200):
    """Reference value: 2-D quadrature of f(q, p) t(X - mu*q - nu*p) over the grid."""
    x.require_direction()
    g = f.grid

    def integrand(q, p):
        return f(q, p) * cross_kernel_12(x, q, p, test)

    return integrate_nd(integrand, [(g.q_min, g.q_max), (g.p_min, g.p_max)], "gauss-legendre", n_points)


def cross_kernel_12(x: TomographicPoint, q, p, test: TestFunction) -> np.ndarray:
    """Smeared delta(X - mu*q - nu*p), the kernel from functions to tomograms."""
    return test(x.X - x.mu * np.asarray(q) - x.nu * np.asarray(p))


def cross_kernel_21(q, p, x: TomographicPoint) -> np.ndarray:
    """Kernel (1/4 pi^2) e^{i(X - mu*q - nu*p)} from tomograms back to functions."""
    return np.exp(1j * (x.X - x.mu * np.asarray(q) - x.nu * np.asarray(p))) / (4.0 * np.pi**2)


def ramlak_kernel(n: int, step: float) -> np.ndarray:
    """Spatial Ram-Lak filter at offsets 0..n-1, n..-1 laid out for circular convolution."""
    offsets = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    h = np.zeros(n)
    h[offsets == 0] = 1.0 / (4.0 * step**2)
    odd = offsets % 2 == 1
    h[odd] = -1.0 / (np.pi**2 * step**2 * offsets[odd] ** 2)
    return h


def hann_taper(n: int, start: float) -> np.ndarray:
    """Frequency taper: one below ``start`` of Nyquist, Hann roll-off to zero above."""
    f = np.abs(np.fft.fftfreq(n)) / 0.5
    taper = np.ones(n)
    high = f > start
    taper[high] = 0.5 * (1.0 + np.cos(np.pi * (f[high] - start) / (1.0 - start)))
    return taper


def check_angles(w: Tomogram, min_angles: int | None = None) -> float:
    """Validate the lattice for back-projection and return the angle spacing.

    Angles must be uniform and cover [0, pi) once; X samples must be uniform.
    """
    min_angles = DEFAULT_CONFIG["min_angles"] if min_angles is None else min_angles
    theta = w.axes["theta"]
    if len(theta) < min_angles:
        raise InsufficientAngles(f"Reconstruction needs at least {min_angles} angles, got {len(theta)}")
    d_theta = np.pi / len(theta)
    expected = theta[0] + d_theta * np.arange(len(theta))
    if np.max(np.abs(theta - expected)) > LATTICE_RTOL * d_theta:
        raise InvalidInput(
            f"Angles must be uniform with spacing pi/{len(theta)} = {d_theta:.6g} and cover [0, pi) once"
        )
    steps = np.diff(w.X)
    if np.max(np.abs(steps - w.dX)) > LATTICE_RTOL * abs(w.dX):
        raise InvalidInput(f"X samples must be uniformly spaced, steps range {steps.min():.6g}..{steps.max():.6g}")
    return float(d_theta)


def deconvolve_window(spectrum: np.ndarray, window, k: np.ndarray) -> np.ndarray:
    """Divide slice spectra by the window transform on the band where it stays above WINDOW_FLOOR.

    Raises SingularWindow when the deconvolved spectra still carry more than
    WINDOW_EDGE_TOL of their peak near the band edge.
    """
    transform = np.asarray(window.fourier(-k))
    floor = WINDOW_FLOOR * abs(complex(window.fourier(0.0)))
    # zeros of the transform can fall between samples; a sign change of a real transform marks one
    scan = np.linspace(0.0, np.max(np.abs(k)), 4096)
    values = np.asarray(window.fourier(scan))
    small = np.abs(values) < floor
    real = np.abs(values.imag) < floor
    small[1:] |= real[1:] & real[:-1] & (np.sign(values.real[1:]) != np.sign(values.real[:-1]))
    k_cut = float(scan[np.argmax(small)]) if small.any() else np.inf
    band = np.abs(k) < k_cut
    result = np.zeros(spectrum.shape, dtype=complex)
    result[..., band] = spectrum[..., band] / transform[band]
    edge = band & (np.abs(k) >= 0.9 * k_cut)
    peak = np.max(np.abs(result))
    if peak > 0 and edge.any():
        tail = np.max(np.abs(result[..., edge]))
        if tail > WINDOW_EDGE_TOL * peak:
            raise SingularWindow(
                f"Window transform drops below {WINDOW_FLOOR:g} at k = {k_cut:.3g} "
                f"where the slices still carry {tail / peak:.3g} of their peak"
            )
    logger.debug("Deconvolved %s window up to k = %.3g", window.kind, k_cut)
    return result


def filtered_projections(w: Tomogram, reach: float, hann_start: float | None = None):
    """Ramp-filter every slice: g(s) = integral of |k| w^(k) e^{-iks} dk.

    The X lattice is extended with zeros so the filtered slices are available
    for |s| <= reach. Thick slices are first divided by the window transform.
    Returns (X_ext, g) with g of shape (n_theta, len(X_ext)).
    """
    hann_start = DEFAULT_CONFIG["hann_start"] if hann_start is None else hann_start
    if w.scheme == "thick" and w.window is None:
        raise InvalidInput("Thick tomograms need their window to be inverted")
    X = w.X
    tau = w.dX
    n_left = max(0, int(np.ceil((X[0] + reach) / tau)) + 2)
    n_right = max(0, int(np.ceil((reach - X[-1]) / tau)) + 2)
    X_ext = np.concatenate(
        [X[0] - tau * np.arange(n_left, 0, -1), X, X[-1] + tau * np.arange(1, n_right + 1)]
    )
    values = np.pad(np.asarray(w.values), [(0, 0), (n_left, n_right)])
    n_fft = int(2 ** np.ceil(np.log2(2 * len(X_ext))))
    response = np.fft.fft(ramlak_kernel(n_fft, tau)) * hann_taper(n_fft, hann_start)
    spectrum = np.fft.fft(values, n=n_fft, axis=-1)
    if w.window is not None:
        spectrum = deconvolve_window(spectrum, w.window, 2.0 * np.pi * np.fft.fftfreq(n_fft, d=tau))
    filtered = np.fft.ifft(spectrum * response, axis=-1)[:, : len(X_ext)]
    if np.isrealobj(w.values):
        filtered = filtered.real
    return X_ext, 4.0 * np.pi**2 * tau * filtered


def radon_inverse(
    w: Tomogram,
    grid: PhaseSpaceGrid,
    min_angles: int | None = None,
    hann_start: float | None = None,
) -> PhaseSpaceFunction:
    """Filtered back-projection of a symplectic or thick tomogram sampled on theta in [0, pi)."""
    if w.scheme not in ("symplectic", "thick"):
        raise InvalidInput(f"radon_inverse expects a symplectic or thick tomogram, got '{w.scheme}'")
    d_theta = check_angles(w, min_angles)
    if w.dX > min(grid.dq, grid.dp) * (1.0 + 1e-9):
        raise AliasedSpectrum(
            f"X spacing {w.dX:.3g} is coarser than the grid spacing {min(grid.dq, grid.dp):.3g}"
        )
    reach = np.hypot(max(abs(grid.q_min), abs(grid.q_max)), max(abs(grid.p_min), abs(grid.p_max)))
    X_ext, g = filtered_projections(w, reach, hann_start)
    Q, P = grid.mesh()
    result = np.zeros(grid.shape, dtype=g.dtype)
    for theta, row in zip(w.axes["theta"], g):
        spline = CubicSpline(X_ext, row, extrapolate=False)
        s = Q * np.cos(theta) + P * np.sin(theta)
        result += np.nan_to_num(spline(s))
    result *= d_theta / (4.0 * np.pi**2)
    logger.info("Reconstructed %dx%d grid from %d angles", grid.n_q, grid.n_p, len(w.axes["theta"]))
    return PhaseSpaceFunction(grid, result, "reconstructed")
