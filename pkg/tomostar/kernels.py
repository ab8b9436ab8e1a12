"""Star-product kernels of the tomographic schemes and star products of tomograms.

Kernels are distributions in X3, so they are only evaluated smeared: every
evaluator takes a TestFunction t and returns the integral of
K(x1, x2, (X3, mu3, nu3)) t(X3 - x3.X) dX3. Symplectic kernels are also
delta-valued in the directions; their second direction is averaged over a
Gaussian of width ``test.eta``.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from tomostar.config import DEFAULT_CONFIG
from tomostar.errors import IncompatibleLattices, InvalidInput, NonConvergent
from tomostar.operators import operator_from_tomogram, tomographic_symbol_grid
from tomostar.phase_space import PhaseSpaceFunction, PhaseSpaceGrid, make_grid
from tomostar.quadratic import slice_transforms
from tomostar.quadrature import TestFunction, gauss_legendre, gaussian_integral, richardson, trapezoid_weights
from tomostar.schemes import GaussianForm, RidgeForm, SchemeKernel, dequantizer, quantizer
from tomostar.symplectic import Tomogram, TomographicPoint, radon_forward_grid, radon_inverse
from tomostar.thick import WindowFunction, thick_from_ideal

logger = logging.getLogger(__name__)

EVALUATOR_SCHEMES = ("symplectic", "thick", "quadratic", "custom")
MODES = ("closed", "oracle")
J = np.array([[0.0, 1.0], [-1.0, 0.0]])
PRODUCT_REACH = 0.7
PAIR_BATCH = 64


def omega(a, b) -> float:
    """Symplectic form a_q b_p - a_p b_q."""
    return float(a[0] * b[1] - a[1] * b[0])


def groenewald(q1, p1, q2, p2, q3, p3):
    """(1/pi^2) exp(2i [w(1,2) + w(2,3) + w(3,1)]) with w(a,b) = q_a p_b - q_b p_a."""
    phase = (q1 * p2 - q2 * p1) + (q2 * p3 - q3 * p2) + (q3 * p1 - q1 * p3)
    return np.exp(2j * phase) / np.pi**2


def twist_apply(K_cl: complex, mu1: float, nu1: float, mu2: float, nu2: float) -> complex:
    """Quantum kernel from the classical one: K_cl e^{(i/2)(nu1 mu2 - nu2 mu1)}."""
    return K_cl * np.exp(0.5j * (nu1 * mu2 - nu2 * mu1))


def _coupling() -> np.ndarray:
    S = np.zeros((6, 6))
    for a, b in ((0, 1), (1, 2), (2, 0)):
        S[2 * a : 2 * a + 2, 2 * b : 2 * b + 2] = J
        S[2 * b : 2 * b + 2, 2 * a : 2 * a + 2] = J.T
    return S


def _smear_direction(form: GaussianForm, kernel: SchemeKernel, eta: float) -> GaussianForm:
    """Average a linear-phase quantizer over directions ~ N(m, eta^2 I)."""
    if eta == 0:
        return form
    if kernel.role != "quantizer" or kernel.scheme not in ("symplectic", "thick"):
        raise InvalidInput("Direction smearing applies to symplectic and thick quantizers only")
    return GaussianForm(form.A + eta**2 * np.eye(2), form.b, form.c0, form.amplitude)


def kernel_compose(
    chi1: SchemeKernel,
    chi2: SchemeKernel,
    phi3: SchemeKernel,
    x1: TomographicPoint,
    x2: TomographicPoint,
    x3: TomographicPoint,
    test: TestFunction,
    damping_levels=None,
    n_k: int = 2000,
    tol: float = 1e-2,
) -> complex:
    """Smeared K = integral of chi1 chi2 phi3 G over R^6, by Gaussian completion.

    phi3 is written in its Fourier representation
    Xi(X3 - L(z3)) = (1/2 pi) int Xi^(k) e^{ik(X3 - L(z3))} dk, which makes the
    z-integral Gaussian for every k. All of z is damped by e^{-sigma^2 |z|^2 / 2}
    and the result extrapolated to sigma -> 0.
    """
    damping_levels = DEFAULT_CONFIG["kernel_damping_levels"] if damping_levels is None else damping_levels
    f1, f2, f3 = chi1.form(x1), chi2.form(x2), phi3.form(x3)
    if not isinstance(f1, GaussianForm) or not isinstance(f2, GaussianForm) or not isinstance(f3, RidgeForm):
        raise InvalidInput("Kernel composition needs two quantizer forms and one dequantizer form")
    if chi2.scheme in ("symplectic", "thick") and test.eta == 0:
        raise InvalidInput("Symplectic kernels are delta-valued in the directions; give the test a positive eta")
    f2 = _smear_direction(f2, chi2, test.eta)
    amplitude = f1.amplitude * f2.amplitude / np.pi**2
    if amplitude == 0:
        return 0j

    k, k_weights = gauss_legendre(-8.0 / test.eps, 8.0 / test.eps, n_k)
    profile = np.asarray(f3.profile(k)) * test.fourier(k) * np.exp(1j * k * (x3.X - f3.l0))
    coupling = -2j * _coupling()
    eye = np.eye(2)

    values = []
    for sigma in damping_levels:
        damp = sigma**2 * eye
        M = np.broadcast_to(coupling, (len(k), 6, 6)).copy()
        M[:, 0:2, 0:2] += f1.A + damp
        M[:, 2:4, 2:4] += f2.A + damp
        M[:, 4:6, 4:6] += 1j * k[:, None, None] * f3.P + damp
        B = np.empty((len(k), 6), dtype=complex)
        B[:, 0:2] = f1.b
        B[:, 2:4] = f2.b
        B[:, 4:6] = -1j * k[:, None] * f3.l
        gauss = gaussian_integral(M, B, f1.c0 + f2.c0)
        values.append(amplitude * np.sum(k_weights * profile * gauss) / (2.0 * np.pi))
        logger.debug("kernel_compose sigma=%.3g -> %s", sigma, values[-1])

    value, residual = richardson(values, damping_levels)
    if residual > tol * max(abs(value), 1e-12):
        raise NonConvergent(f"Kernel damping extrapolation residual {residual:.3g} for value {abs(value):.3g}")
    return value


def _quadratic_center_kernel(mu1, nu1, mu2, nu2, x3: TomographicPoint, test: TestFunction, c: float):
    """The circle kernel without its e^{i(X1 + X2)} factor, broadcast over the centers."""
    support = (
        (mu1 + mu2 - 2.0 * x3.mu + nu2 - nu1) ** 2
        + (nu1 + nu2 - 2.0 * x3.nu + mu1 - mu2) ** 2
    ) / 4.0
    prefactor = 2.0 / (1j * np.pi**3) * (c * np.pi) ** 2
    return prefactor * np.exp(-0.5j * ((mu1 - mu2) ** 2 + (nu1 - nu2) ** 2)) * 0.25 * test(support - x3.X)


def kernel_quadratic(
    x1: TomographicPoint,
    x2: TomographicPoint,
    x3: TomographicPoint,
    test: TestFunction,
    constant: float | None = None,
) -> complex:
    """Closed-form smeared kernel of the circle scheme.

    K = (2/(i pi^3)) e^{i(X1+X2)} e^{-i|m1 - m2|^2 / 2} delta(4 X3 - S) with
    S = (mu1 + mu2 - 2 mu3 + nu2 - nu1)^2 + (nu1 + nu2 - 2 nu3 + mu1 - mu2)^2;
    the delta contributes t(S/4 - x3.X) / 4. The prefactor assumes quantizer
    amplitude c/pi with c = 1/pi and scales as (c pi)^2 otherwise.
    """
    c = DEFAULT_CONFIG["inverse_constant"] if constant is None else constant
    value = _quadratic_center_kernel(x1.mu, x1.nu, x2.mu, x2.nu, x3, test, c)
    return complex(np.exp(1j * (x1.X + x2.X)) * value)


def _symplectic_closed(x1, x2, x3, test: TestFunction, twisted: bool) -> complex:
    if test.eta <= 0:
        raise InvalidInput("Symplectic kernels need a positive direction width eta")
    eta2 = test.eta**2
    m1 = np.array([x1.mu, x1.nu])
    m3 = np.array([x3.mu, x3.nu])
    a = m1 + np.array([x2.mu, x2.nu])
    A = test.eps**2 + float(m3 @ m3) / eta2
    shift = 0.5 * omega(m1, m3) if twisted else 0.0
    B = -float(a @ m3) / eta2 + 1j * (x3.X + shift)
    gauss = np.sqrt(2.0 * np.pi / A) * np.exp(B**2 / (2.0 * A) - float(a @ a) / (2.0 * eta2))
    return complex(np.exp(1j * (x1.X + x2.X)) / (8.0 * np.pi**3) / (2.0 * np.pi * eta2) * gauss)


def kernel_symplectic(x1, x2, x3, test: TestFunction) -> complex:
    """Closed-form smeared kernel of the symplectic scheme, second direction averaged over width eta."""
    return _symplectic_closed(x1, x2, x3, test, twisted=True)


def kernel_symplectic_classical(x1, x2, x3, test: TestFunction) -> complex:
    """Kernel of the pointwise product of functions, in symplectic tomograms."""
    return _symplectic_closed(x1, x2, x3, test, twisted=False)


@dataclass(frozen=True)
class KernelEvaluator:
    """A star-product kernel K(x1, x2, x3) of one scheme, evaluated smeared.

    ``mode`` picks the closed form or the composition oracle, which damps with
    ``damping_levels``. ``classical`` selects the commutative kernel (symplectic
    family only). Custom evaluators carry their own (chi1, chi2, phi3) triple
    and only support the oracle.
    """

    scheme: str
    mode: str = "closed"
    window: WindowFunction | None = None
    classical: bool = False
    constant: float | None = None
    triple: tuple[SchemeKernel, SchemeKernel, SchemeKernel] | None = field(default=None)
    damping_levels: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.scheme not in EVALUATOR_SCHEMES:
            raise InvalidInput(f"Unknown kernel scheme '{self.scheme}', expected one of {EVALUATOR_SCHEMES}")
        if self.mode not in MODES:
            raise InvalidInput(f"Unknown kernel mode '{self.mode}', expected one of {MODES}")
        if self.scheme == "thick" and self.window is None:
            raise InvalidInput("Thick kernels need a window")
        if self.scheme == "custom" and (self.triple is None or self.mode != "oracle"):
            raise InvalidInput("Custom kernels need a (chi1, chi2, phi3) triple and oracle mode")
        if self.classical and self.scheme not in ("symplectic", "thick"):
            raise InvalidInput("Only the symplectic family has a classical kernel here")

    def composition_triple(self) -> tuple[SchemeKernel, SchemeKernel, SchemeKernel]:
        if self.triple is not None:
            return self.triple
        if self.scheme == "quadratic":
            chi = quantizer("quadratic", constant=self.constant)
            return chi, chi, dequantizer("quadratic")
        chi = quantizer(self.scheme, self.window)
        return chi, chi, dequantizer(self.scheme, self.window)

    def __call__(self, x1, x2, x3, test: TestFunction) -> complex:
        if self.mode == "oracle":
            value = kernel_compose(*self.composition_triple(), x1, x2, x3, test, self.damping_levels)
            if self.classical:
                value = value / twist_apply(1.0, x1.mu, x1.nu, x2.mu, x2.nu)
            return value
        if self.scheme == "quadratic":
            return kernel_quadratic(x1, x2, x3, test, self.constant)
        ideal = KernelEvaluator("symplectic", "closed", classical=self.classical)
        if self.scheme == "thick":
            return kernel_thick(ideal, self.window, x1, x2, x3, test)
        if self.classical:
            return kernel_symplectic_classical(x1, x2, x3, test)
        return kernel_symplectic(x1, x2, x3, test)


def kernel_thick(
    Kdelta: KernelEvaluator,
    Xi: WindowFunction,
    x1: TomographicPoint,
    x2: TomographicPoint,
    x3: TomographicPoint,
    test: TestFunction,
) -> complex:
    """N^2 times the integral of K_delta(x1, x2, (X3 - Y, mu3, nu3)) Xi(Y) dY.

    The factor N^2 comes from the window normalization carried by the two
    thick quantizers.
    """
    Y, weights = Xi.nodes()
    total = 0j
    for y, weight in zip(Y, weights):
        shifted = TomographicPoint(x3.X - y, x3.mu, x3.nu)
        total += weight * Kdelta(x1, x2, shifted, test)
    return complex(Xi.normalization**2 * total)


def evaluate_request(data: dict, damping_levels=None) -> complex:
    """Evaluate a kernel request {"scheme", "x1", "x2", "x3", "test", optional "mode"/"window"}."""
    try:
        points = [TomographicPoint(*(float(v) for v in data[name])) for name in ("x1", "x2", "x3")]
        test_data = data.get("test", {})
        test = TestFunction(
            float(test_data.get("eps", DEFAULT_CONFIG["test_eps"])),
            float(test_data.get("eta", DEFAULT_CONFIG["direction_width"])),
        )
        window = WindowFunction.from_dict(data["window"]) if "window" in data else None
        evaluator = KernelEvaluator(
            data["scheme"],
            data.get("mode", "closed"),
            window,
            bool(data.get("classical", False)),
            damping_levels=None if damping_levels is None else tuple(damping_levels),
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InvalidInput):
            raise
        raise InvalidInput(f"Bad kernel request: {e}") from e
    return evaluator(*points, test)


def _check_lattices(A: Tomogram, B: Tomogram) -> None:
    if A.scheme != B.scheme:
        raise IncompatibleLattices(f"Cannot multiply a {A.scheme} tomogram with a {B.scheme} one")
    for name in A.axes:
        if len(A.axes[name]) != len(B.axes[name]) or not np.allclose(A.axes[name], B.axes[name]):
            raise IncompatibleLattices(f"Tomograms disagree on the '{name}' axis")
    if A.scheme == "thick" and not _same_window(A.window, B.window):
        raise IncompatibleLattices("Thick tomograms were taken with different windows")


def _same_window(a: WindowFunction | None, b: WindowFunction | None) -> bool:
    if a is None or b is None:
        return a is b
    return json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


def _kernel_for(A: Tomogram, K: KernelEvaluator | None) -> KernelEvaluator:
    K = K or KernelEvaluator(A.scheme, window=A.window)
    if K.scheme == "custom":
        raise InvalidInput("Custom kernels have no operator form; evaluate them pointwise")
    if K.scheme != A.scheme:
        raise IncompatibleLattices(f"A {K.scheme} kernel cannot multiply {A.scheme} tomograms")
    if K.scheme == "thick" and not _same_window(K.window, A.window):
        raise IncompatibleLattices("The kernel window differs from the tomogram window")
    return K


def product_grid(w: Tomogram) -> PhaseSpaceGrid:
    """Square grid with the X spacing of ``w``, inside the disk its X range covers."""
    half = int(round(PRODUCT_REACH * np.max(np.abs(w.X)) / w.dX))
    h = half * w.dX
    return make_grid(-h, h, -h, h, 2 * half + 1, 2 * half + 1)


def _classical_product(A: Tomogram, B: Tomogram, grid: PhaseSpaceGrid | None) -> Tomogram:
    grid = grid or product_grid(A)
    f, g = radon_inverse(A, grid), radon_inverse(B, grid)
    product = PhaseSpaceFunction(grid, f.values * g.values, "product")
    ideal = radon_forward_grid(product, A.X, A.axes["theta"])
    logger.info("Classical product of %s tomograms on a %dx%d grid", A.scheme, grid.n_q, grid.n_p)
    if A.scheme == "thick":
        return thick_from_ideal(ideal, A.window)
    return ideal


def star_product(
    A: Tomogram,
    B: Tomogram,
    K: KernelEvaluator | None = None,
    dim: int | None = None,
    grid: PhaseSpaceGrid | None = None,
) -> Tomogram:
    """Symbol of the product of the operators (functions, for classical K) with symbols A and B.

    The quantum product integral of K(x1, x2, x) A(x1) B(x2) factorizes
    through the quantizers: it is Tr(A_op B_op phi(x)), evaluated on A's lattice.
    Thick operators come from the window-deconvolved slices. The classical
    product is the tomogram of the product of the reconstructed functions on
    ``grid`` (``product_grid`` by default).
    """
    _check_lattices(A, B)
    K = _kernel_for(A, K)
    if K.classical:
        return _classical_product(A, B, grid)
    dim = DEFAULT_CONFIG["dim"] if dim is None else dim
    c = K.constant
    product = operator_from_tomogram(A, dim, c) @ operator_from_tomogram(B, dim, c)
    logger.info("Star product of %s tomograms through dim %d operators", A.scheme, dim)
    return tomographic_symbol_grid(product, A)


def star_product_smeared(
    A: Tomogram,
    B: Tomogram,
    x: TomographicPoint,
    test: TestFunction,
    K: KernelEvaluator | None = None,
    x_cutoff_rel: float | None = None,
) -> complex:
    """2 pi times the integral of K(x1, x2, x) A(x1) B(x2), smeared in X by ``test``.

    Integrates the closed circle kernel itself. Its X1 and X2 dependence is
    e^{i(X1 + X2)}, so those integrals are the slice transforms of A and B and
    what remains is a sum over pairs of centers.
    """
    _check_lattices(A, B)
    K = _kernel_for(A, K)
    if K.scheme != "quadratic" or K.mode != "closed":
        raise InvalidInput("Kernel integration needs circle tomograms and the closed kernel")
    c = DEFAULT_CONFIG["inverse_constant"] if K.constant is None else K.constant
    mu, nu = A.axes["mu"], A.axes["nu"]
    M, N = (a.ravel() for a in np.meshgrid(mu, nu, indexing="ij"))
    weights = np.outer(trapezoid_weights(mu), trapezoid_weights(nu)).ravel()
    left = slice_transforms(A, x_cutoff_rel).ravel() * weights
    right = slice_transforms(B, x_cutoff_rel).ravel() * weights
    total = 0j
    for start in range(0, M.size, PAIR_BATCH):
        stop = start + PAIR_BATCH
        m1, n1 = M[start:stop, None], N[start:stop, None]
        block = _quadratic_center_kernel(m1, n1, M[None, :], N[None, :], x, test, c)
        total += left[start:stop] @ block @ right
    logger.debug("Kernel integral over %d center pairs: %s", M.size**2, total)
    return complex(2.0 * np.pi * total)


def star_trace(w: Tomogram) -> complex:
    """Trace of the operator behind a symbol: its X integral, averaged over directions."""
    return complex(np.mean(w.slice_masses()))
