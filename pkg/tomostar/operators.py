"""Operators on a truncated Fock space and their phase-space and tomographic symbols.

Conventions: hbar = 1, a = (q + ip)/sqrt(2), T(b) = exp(b a^dag - b* a), and the
Weyl quantizer D(q, p) = (1/pi) T(2 alpha) Parity with alpha = (q + ip)/sqrt(2).
Tomographic symbols are Tr(A phi(x)), so a density operator's symbol is the
tomogram of its Wigner function and reconstruction carries a factor 2 pi.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import eval_genlaguerre, eval_laguerre, gammaln

from tomostar.config import DEFAULT_CONFIG
from tomostar.errors import (
    DegenerateDirection,
    InvalidDim,
    InvalidInput,
    LeakageExceeded,
    TruncatedSupport,
)
from tomostar.phase_space import PhaseSpaceFunction, PhaseSpaceGrid, StateSpec, SUPPORT_TOL
from tomostar.quadratic import slice_transforms
from tomostar.quadrature import trapezoid_weights
from tomostar.schemes import SchemeKernel, dequantizer
from tomostar.symplectic import Tomogram, TomographicPoint, check_angles, filtered_projections, symplectic_tomogram
from tomostar.thick import thick_from_ideal

logger = logging.getLogger(__name__)

# Extra Fock levels used when products of displacements are formed.
WORK_PAD = 48
BATCH = 512


@dataclass(frozen=True, eq=False)
class Operator:
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidDim(f"Operator matrix must be square, got shape {matrix.shape}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.matrix))

    def hermiticity_defect(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T))

    def leakage(self) -> float:
        """Weight on the last kept Fock level."""
        return float(abs(self.matrix[-1, -1]))

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix - other.matrix)

    def __mul__(self, factor: complex) -> "Operator":
        return Operator(factor * self.matrix)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"dim": self.dim, "re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Operator":
        try:
            matrix = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
            dim = int(data["dim"])
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInput(f"Bad operator description: {e}") from e
        if matrix.shape != (dim, dim):
            raise InvalidDim(f"Operator of dim {dim} has a matrix of shape {matrix.shape}")
        return cls(matrix)


def _require_dim(dim: int, minimum: int) -> None:
    if int(dim) != dim or dim < minimum:
        raise InvalidDim(f"Truncation dimension must be an integer >= {minimum}, got {dim}")


def ladder_ops(dim: int) -> tuple[Operator, Operator]:
    """Annihilation and creation operators, a|n> = sqrt(n)|n-1>."""
    _require_dim(dim, 2)
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    return Operator(a), Operator(a.T)


def position(dim: int) -> Operator:
    a, a_dag = ladder_ops(dim)
    return (a + a_dag) * (1.0 / np.sqrt(2.0))


def momentum(dim: int) -> Operator:
    a, a_dag = ladder_ops(dim)
    return (a - a_dag) * (1.0 / (1j * np.sqrt(2.0)))


def number(dim: int) -> Operator:
    _require_dim(dim, 1)
    return Operator(np.diag(np.arange(dim, dtype=float)))


def identity(dim: int) -> Operator:
    _require_dim(dim, 1)
    return Operator(np.eye(dim))


def parity(dim: int) -> Operator:
    _require_dim(dim, 1)
    return Operator(np.diag((-1.0) ** np.arange(dim)))


def displacement_matrix(beta, dim: int) -> np.ndarray:
    """Matrix elements <m|T(beta)|n>, m, n < dim, batched over ``beta``.

    Closed form: for m >= n, sqrt(n!/m!) beta^(m-n) e^{-|b|^2/2} L_n^(m-n)(|b|^2),
    and (-beta*)^(n-m) with the roles swapped for m < n.
    """
    beta = np.asarray(beta, dtype=complex)[..., None, None]
    m, n = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    low, high = np.minimum(m, n), np.maximum(m, n)
    diff = high - low
    x = np.abs(beta) ** 2
    base = np.where(m >= n, beta, -np.conj(beta))
    prefactor = np.exp(0.5 * (gammaln(low + 1) - gammaln(high + 1)))
    return prefactor * base**diff * np.exp(-0.5 * x) * eval_genlaguerre(low, diff, x)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    log_norm = -0.5 * abs(alpha) ** 2 - 0.5 * gammaln(n + 1)
    return np.exp(log_norm) * np.power(complex(alpha), n)


def check_leakage(rho: Operator, tol: float | None = None) -> None:
    tol = DEFAULT_CONFIG["leakage_tol"] if tol is None else tol
    if rho.leakage() >= tol:
        raise LeakageExceeded(
            f"Weight {rho.leakage():.3g} on Fock level {rho.dim - 1} exceeds {tol:.3g}; raise the truncation"
        )


def weyl_D(q: float, p: float, dim: int, tol: float | None = None) -> Operator:
    """D(q, p) = (1/pi) T(2 alpha) Parity.

    Raises LeakageExceeded when T(2 alpha)|0> loses more than ``tol`` of its
    norm to levels beyond the truncation.
    """
    _require_dim(dim, 2)
    tol = DEFAULT_CONFIG["leakage_tol"] if tol is None else tol
    beta = np.sqrt(2.0) * complex(q, p)
    shift = displacement_matrix(beta, dim)
    lost = 1.0 - float(np.sum(np.abs(shift[:, 0]) ** 2))
    if lost > tol:
        raise LeakageExceeded(f"Displacement by |2 alpha| = {abs(beta):.3g} leaks {lost:.3g} beyond dim {dim}")
    return Operator(shift * (-1.0) ** np.arange(dim) / np.pi)


def weyl_symbol(A: Operator, q: float, p: float) -> complex:
    """Tr(A U(q, p)) with U = 2 pi D: 2 pi times the Wigner function for states."""
    return complex(_weyl_symbols(A, np.asarray([q], dtype=float), np.asarray([p], dtype=float))[0])


def _weyl_symbols(A: Operator, q: np.ndarray, p: np.ndarray) -> np.ndarray:
    signs = (-1.0) ** np.arange(A.dim)
    beta = np.sqrt(2.0) * (q + 1j * p)
    out = np.empty(beta.shape, dtype=complex)
    for start in range(0, beta.size, BATCH):
        shift = displacement_matrix(beta.flat[start : start + BATCH], A.dim)
        out.flat[start : start + BATCH] = 2.0 * np.einsum("nm,bmn,n->b", A.matrix, shift, signs)
    return out


def weyl_symbol_grid(A: Operator, grid: PhaseSpaceGrid) -> PhaseSpaceFunction:
    Q, P = grid.mesh()

    def symbol(q, p):
        q, p = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
        return _weyl_symbols(A, q.ravel(), p.ravel()).reshape(q.shape)

    return PhaseSpaceFunction(grid, symbol(Q, P), "weyl-symbol", {}, symbol)


def weyl_reconstruct(f: PhaseSpaceFunction, dim: int, support_tol: float | None = None) -> Operator:
    """A = integral of f(q, p) D(q, p) dq dp, trapezoid rule on the grid of f."""
    _require_dim(dim, 2)
    support_tol = SUPPORT_TOL if support_tol is None else support_tol
    ratio = f.boundary_ratio()
    if ratio > support_tol:
        raise TruncatedSupport(f"Symbol reaches {ratio:.3g} of its peak on the grid boundary")
    g = f.grid
    weights = np.outer(trapezoid_weights(g.q), trapezoid_weights(g.p))
    Q, P = g.mesh()
    beta = (np.sqrt(2.0) * (Q + 1j * P)).ravel()
    coeff = (f.values * weights).ravel()
    keep = coeff != 0
    beta, coeff = beta[keep], coeff[keep]
    total = np.zeros((dim, dim), dtype=complex)
    for start in range(0, beta.size, BATCH):
        shift = displacement_matrix(beta[start : start + BATCH], dim)
        total += np.einsum("b,bmn->mn", coeff[start : start + BATCH], shift)
    return Operator(total * (-1.0) ** np.arange(dim) / np.pi)


def hermite_functions(x, count: int) -> np.ndarray:
    """Normalized oscillator eigenfunctions psi_0..psi_{count-1} at x, shape (count, *x.shape)."""
    x = np.asarray(x, dtype=float)
    psi = np.empty((count,) + x.shape)
    psi[0] = np.pi**-0.25 * np.exp(-0.5 * x**2)
    if count > 1:
        psi[1] = np.sqrt(2.0) * x * psi[0]
    for n in range(1, count - 1):
        psi[n + 1] = np.sqrt(2.0 / (n + 1)) * x * psi[n] - np.sqrt(n / (n + 1)) * psi[n - 1]
    return psi


def _line_delta(X, mu: float, nu: float, dim: int) -> np.ndarray:
    """<j| delta(X - mu q - nu p) |k> for each X, shape (*X.shape, dim, dim)."""
    r = np.hypot(mu, nu)
    if r == 0:
        raise DegenerateDirection("The dequantizer needs a direction (mu, nu) != (0, 0)")
    theta = np.arctan2(nu, mu)
    psi = np.moveaxis(hermite_functions(np.asarray(X, dtype=float) / r, dim), 0, -1)
    phase = np.exp(1j * theta * np.arange(dim))
    rows = psi * phase
    return rows[..., :, None] * np.conj(rows)[..., None, :] / r


def _circle_weights(X: float, dim: int) -> np.ndarray:
    """Diagonal of the Weyl quantized delta(X - q^2 - p^2): (-1)^n e^{-X} L_n(2X)."""
    n = np.arange(dim)
    if X <= 0:
        return np.zeros(dim)
    return (-1.0) ** n * np.exp(-X) * eval_laguerre(n, 2.0 * X)


def _displaced(diagonal: np.ndarray, mu, nu, dim: int) -> np.ndarray:
    """T(a) diag T(a)^dag truncated to dim, a = (mu + i nu)/sqrt(2); batched over mu, nu."""
    work = len(diagonal)
    shift = displacement_matrix((np.asarray(mu) + 1j * np.asarray(nu)) / np.sqrt(2.0), work)
    kept = shift[..., :dim, :]
    return (kept * diagonal) @ np.conj(np.swapaxes(kept, -1, -2))


def rotation_quantizer_diagonal(work: int) -> np.ndarray:
    """Diagonal of the Weyl quantized e^{-i(q^2 + p^2)}: (1 - i)/2 * (-i)^n."""
    return 0.5 * (1.0 - 1.0j) * (-1.0j) ** np.arange(work)


def scheme_quantizer(kernel: SchemeKernel, x: TomographicPoint, dim: int) -> Operator:
    """The operator integral of kernel(q, p, x) D(q, p) dq dp.

    Ridge and Gaussian kernels of the built-in schemes are quantized exactly:
    functions of mu q + nu p by spectral calculus, circle functions through
    displaced Laguerre diagonals.
    """
    _require_dim(dim, 2)
    scheme, role = kernel.scheme, kernel.role
    if scheme == "custom":
        raise InvalidInput("Custom kernels have no operator form; use kernel composition instead")
    if role == "quantizer":
        if scheme == "quadratic":
            work = dim + WORK_PAD
            matrix = _displaced(rotation_quantizer_diagonal(work), x.mu, x.nu, dim)
            return Operator(kernel.inverse_constant / np.pi * np.exp(1j * x.X) * matrix)
        amplitude = 1.0 / (4.0 * np.pi**2)
        if scheme == "thick":
            amplitude = kernel.window.normalization * amplitude
        beta = (x.nu - 1j * x.mu) / np.sqrt(2.0)
        return Operator(amplitude * np.exp(1j * x.X) * displacement_matrix(beta, dim))
    if scheme == "quadratic":
        work = dim + WORK_PAD
        return Operator(_displaced(_circle_weights(x.X, work), x.mu, x.nu, dim))
    if scheme == "thick":
        Y, weights = kernel.window.nodes()
        return Operator(np.einsum("y,yjk->jk", weights, _line_delta(x.X - Y, x.mu, x.nu, dim)))
    return Operator(_line_delta(x.X, x.mu, x.nu, dim))


def tomographic_symbol(A: Operator, scheme: str | SchemeKernel, x: TomographicPoint) -> complex:
    """Tr(A phi(x)) for the scheme's dequantizer phi."""
    kernel = dequantizer(scheme) if isinstance(scheme, str) else scheme
    phi = scheme_quantizer(kernel, x, A.dim)
    return complex(np.trace(A.matrix @ phi.matrix))


def tomographic_symbol_grid(A: Operator, like: Tomogram) -> Tomogram:
    """Symbols of A on the lattice of ``like``.

    Thick symbols are the window convolution of the ideal ones on the same lattice.
    """
    dim = A.dim
    X = like.X
    if like.scheme == "thick":
        ideal = tomographic_symbol_grid(A, symplectic_tomogram(X, like.axes["theta"], np.zeros(like.values.shape)))
        return thick_from_ideal(ideal, like.window)
    if like.scheme == "symplectic":
        rows = []
        for theta in like.axes["theta"]:
            rows.append(np.einsum("xjk,kj->x", _line_delta(X, np.cos(theta), np.sin(theta), dim), A.matrix))
        return like.with_values(np.array(rows))
    if like.scheme == "quadratic":
        work = dim + WORK_PAD
        mu, nu = like.axes["mu"], like.axes["nu"]
        weights = np.array([_circle_weights(value, work) for value in X])
        values = np.empty((len(mu), len(nu), len(X)), dtype=complex)
        for i, m in enumerate(mu):
            shift = displacement_matrix((m + 1j * nu) / np.sqrt(2.0), work)[:, :dim, :]
            # diagonal of T^dag A T in the displaced frame
            diag = np.sum(np.conj(shift) * (A.matrix @ shift), axis=-2)
            values[i] = diag @ weights.T
        return like.with_values(values)
    raise InvalidInput(f"Symbols on a '{like.scheme}' lattice are not supported")


def operator_from_tomogram(
    w: Tomogram,
    dim: int,
    c: float | None = None,
    x_cutoff_rel: float | None = None,
    min_angles: int | None = None,
) -> Operator:
    """Reconstruct the operator whose tomographic symbol is ``w``.

    The result is 2 pi times the integral of w(x) chi(x) dx with the scheme
    quantizer chi. Symplectic and thick tomograms are filtered (thick slices
    deconvolved by their window) and paired with Hermite functions; quadratic
    tomograms are summed against displaced quantizers.
    """
    _require_dim(dim, 2)
    if w.scheme in ("symplectic", "thick"):
        return _symplectic_reconstruct(w, dim, min_angles)
    if w.scheme == "quadratic":
        return _quadratic_reconstruct(w, dim, c, x_cutoff_rel)
    raise InvalidInput(f"Operator reconstruction from '{w.scheme}' tomograms is not supported")


def _symplectic_reconstruct(w: Tomogram, dim: int, min_angles: int | None = None) -> Operator:
    d_theta = check_angles(w, min_angles)
    reach = max(float(np.max(np.abs(w.X))), np.sqrt(2.0 * dim + 1.0) + 6.0)
    X_ext, g = filtered_projections(w, reach)
    psi = hermite_functions(X_ext, dim)
    products = psi[:, None, :] * psi[None, :, :]
    # integral of g_theta(X) psi_j psi_k dX per angle
    moments = trapezoid(g[:, None, None, :] * products[None], X_ext, axis=-1)
    j = np.arange(dim)
    total = np.zeros((dim, dim), dtype=complex)
    for theta, block in zip(w.axes["theta"], moments):
        total += np.exp(1j * theta * (j[:, None] - j[None, :])) * block
    logger.info("Reconstructed dim %d operator from %d angles", dim, len(w.axes["theta"]))
    return Operator(total * d_theta / (2.0 * np.pi))


def _quadratic_reconstruct(w: Tomogram, dim: int, c: float | None, x_cutoff_rel: float | None = None) -> Operator:
    c = DEFAULT_CONFIG["inverse_constant"] if c is None else c
    g = slice_transforms(w, x_cutoff_rel)
    mu, nu = w.axes["mu"], w.axes["nu"]
    M, N = np.meshgrid(mu, nu, indexing="ij")
    coeff = (g * np.outer(trapezoid_weights(mu), trapezoid_weights(nu))).ravel()
    keep = coeff != 0
    coeff, M, N = coeff[keep], M.ravel()[keep], N.ravel()[keep]
    work = dim + WORK_PAD
    diagonal = rotation_quantizer_diagonal(work)
    total = np.zeros((dim, dim), dtype=complex)
    for start in range(0, coeff.size, BATCH // 8):
        stop = start + BATCH // 8
        total += np.einsum("b,bjk->jk", coeff[start:stop], _displaced(diagonal, M[start:stop], N[start:stop], dim))
    logger.info("Reconstructed dim %d operator from %d circle centers", dim, coeff.size)
    return Operator(2.0 * c * total)


def fock_density(n: int, dim: int) -> Operator:
    _require_dim(dim, 2)
    if not 0 <= n < dim:
        raise InvalidDim(f"Fock state |{n}> does not fit in dim {dim}")
    matrix = np.zeros((dim, dim))
    matrix[n, n] = 1.0
    return Operator(matrix)


def coherent_density(alpha: complex, dim: int, tol: float | None = None) -> Operator:
    _require_dim(dim, 2)
    psi = coherent_amplitudes(alpha, dim)
    rho = Operator(np.outer(psi, psi.conj()))
    check_leakage(rho, tol)
    return rho


def thermal_density(nbar: float, dim: int, tol: float | None = None) -> Operator:
    _require_dim(dim, 2)
    if nbar == 0:
        return fock_density(0, dim)
    ratio = nbar / (nbar + 1.0)
    rho = Operator(np.diag(ratio ** np.arange(dim) / (nbar + 1.0)))
    check_leakage(rho, tol)
    return rho


def density_from_state(spec: StateSpec, dim: int, leakage_tol: float | None = None) -> Operator:
    """Density operator of a quantum test state."""
    if spec.kind == "coherent":
        return coherent_density(spec.alpha, dim, leakage_tol)
    if spec.kind == "fock":
        return fock_density(int(spec.n), dim)
    if spec.kind == "thermal":
        return thermal_density(spec.nbar, dim, leakage_tol)
    raise InvalidInput(f"'{spec.kind}' is a classical density and has no density operator")
