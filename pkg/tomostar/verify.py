"""Property suites run by ``tomo verify``.

Each check measures one error against its tolerance. Library errors raised
while measuring count as failures and are reported with their message.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from tomostar.config import DEFAULT_CONFIG
from tomostar.errors import InvalidInput, TomographyError
from tomostar.kernels import (
    KernelEvaluator,
    groenewald,
    kernel_quadratic,
    kernel_symplectic,
    kernel_symplectic_classical,
    kernel_thick,
    star_product,
    star_trace,
    twist_apply,
)
from tomostar.operators import (
    Operator,
    coherent_density,
    density_from_state,
    fock_density,
    operator_from_tomogram,
    tomographic_symbol,
    tomographic_symbol_grid,
    weyl_reconstruct,
    weyl_symbol_grid,
)
from tomostar.phase_space import StateSpec, eval_state, make_grid, weyl_to_wigner
from tomostar.quadratic import circle_forward_points, fit_constant, quadratic_tomogram, round_trip
from tomostar.quadrature import TestFunction
from tomostar.symplectic import (
    TomographicPoint,
    radon_forward_grid,
    radon_forward_points,
    radon_inverse,
    symplectic_tomogram,
)
from tomostar.thick import WindowFunction, thick_forward, thick_from_ideal

logger = logging.getLogger(__name__)

SUITES = ("classical", "quantum", "kernels", "all")

QUANTUM_STATES = (
    StateSpec("fock", n=0),
    StateSpec("fock", n=1),
    StateSpec("coherent", alpha=1 + 0j),
)


@dataclass
class Check:
    name: str
    passed: bool
    error: float | None
    tol: float
    message: str = ""


def _measure(name: str, tol: float, fn: Callable[[], float]) -> Check:
    try:
        error = float(fn())
    except TomographyError as e:
        logger.warning("%s raised %s: %s", name, type(e).__name__, e)
        return Check(name, False, None, tol, f"{type(e).__name__}: {e}")
    passed = bool(np.isfinite(error) and error <= tol)
    logger.info("%s: error %.3g (tol %.3g) %s", name, error, tol, "ok" if passed else "FAILED")
    return Check(name, passed, error, tol)


def _rel_l2(values, reference) -> float:
    values = np.asarray(values)
    reference = np.asarray(reference)
    return float(np.linalg.norm(values - reference) / np.linalg.norm(reference))


def _rel_max(values, reference) -> float:
    values = np.asarray(values)
    reference = np.asarray(reference)
    return float(np.max(np.abs(values - reference)) / np.max(np.abs(reference)))


def _source(spec: StateSpec, half_width: float = 9.0, n: int = 181):
    return eval_state(spec, make_grid(-half_width, half_width, -half_width, half_width, n, n))


# classical


def _settings(config: dict | None) -> dict:
    return {**DEFAULT_CONFIG, **(config or {})}


def _symplectic_round_trip(spec: StateSpec, cfg: dict, window: WindowFunction | None = None) -> float:
    source = _source(spec)
    X = np.linspace(-6.0, 6.0, 121)
    theta = np.linspace(0.0, np.pi, 64, endpoint=False)
    target = make_grid(-5.0, 5.0, -5.0, 5.0, 101, 101)
    w = radon_forward_grid(source, X, theta, cfg["radon_step_factor"])
    if window is not None:
        w = thick_from_ideal(w, window)
    reconstructed = radon_inverse(w, target, cfg["min_angles"], cfg["hann_start"])
    return _rel_l2(reconstructed.values.real, eval_state(spec, target).values.real)


def _homogeneity(rng: np.random.Generator) -> float:
    source = _source(StateSpec("coherent", alpha=0.5 - 0.3j))
    X = rng.uniform(-2.0, 2.0, 20)
    angle = rng.uniform(0.0, 2.0 * np.pi, 20)
    radius = rng.uniform(0.5, 1.5, 20)
    mu, nu = radius * np.cos(angle), radius * np.sin(angle)
    reference = radon_forward_points(source, X, mu, nu)
    errors = [
        _rel_max(abs(lam) * radon_forward_points(source, lam * X, lam * mu, lam * nu), reference)
        for lam in (-2.0, 0.5, 3.0)
    ]
    return max(errors)


def _thick_identity(window: WindowFunction) -> float:
    source = _source(StateSpec("coherent"))
    X = np.linspace(-8.0, 8.0, 641)
    theta = np.array([0.0, np.pi / 3.0])
    smeared = thick_from_ideal(radon_forward_grid(source, X, theta), window)
    samples = np.linspace(-3.0, 3.0, 13)
    error = 0.0
    for i, t in enumerate(theta):
        direct = [thick_forward(source, window, TomographicPoint.from_angle(x, t)) for x in samples]
        error = max(error, np.max(np.abs(np.interp(samples, X, smeared.values[i]) - direct)))
    return error


def _quadratic_slice() -> float:
    source = _source(StateSpec("coherent"))
    X = np.linspace(0.05, 6.0, 40)
    return float(np.max(np.abs(circle_forward_points(source, X, 0.0, 0.0) - np.exp(-X))))


def classical_suite(seed: int, config: dict | None = None) -> list[Check]:
    cfg = _settings(config)
    rng = np.random.default_rng(seed)
    checks = [
        _measure(
            f"symplectic round trip alpha={alpha}",
            1e-3,
            lambda a=alpha: _symplectic_round_trip(StateSpec("coherent", alpha=a), cfg),
        )
        for alpha in (0j, 1 + 0j, 1j)
    ]
    checks.append(_measure("symplectic homogeneity", 1e-6, lambda: _homogeneity(rng)))
    rectangular = WindowFunction("rectangular", 2.0)
    gaussian = WindowFunction("gaussian", 1.0)
    checks.append(_measure("thick identity rectangular", 1e-6, lambda: _thick_identity(rectangular)))
    checks.append(_measure("thick identity gaussian", 1e-6, lambda: _thick_identity(gaussian)))
    checks.append(
        _measure(
            "thick round trip gaussian sigma=0.5",
            5e-3,
            lambda: _symplectic_round_trip(StateSpec("coherent"), cfg, WindowFunction("gaussian", 0.5)),
        )
    )
    checks.append(
        _measure(
            "window normalization rectangular",
            1e-8,
            lambda: abs(rectangular.normalization - 1.0 / (2.0 * np.sin(1.0))),
        )
    )
    checks.append(
        _measure("window normalization gaussian", 1e-8, lambda: abs(gaussian.normalization - np.exp(0.5)))
    )
    checks.append(_measure("quadratic slice at the origin", 1e-3, _quadratic_slice))

    calibration = {}
    inverse = {"damping_levels": cfg["damping_levels"], "x_cutoff_rel": cfg["x_cutoff_rel"]}

    def calibrated_round_trip():
        reconstructed, reference = round_trip(StateSpec("coherent"), 1.0, **inverse)
        calibration["c"] = fit_constant(reconstructed, reference)
        return _rel_l2((calibration["c"] * reconstructed).values, reference.values)

    def calibration_spread():
        if "c" not in calibration:
            calibration["c"] = fit_constant(*round_trip(StateSpec("coherent"), 1.0, **inverse))
        c_check = fit_constant(*round_trip(StateSpec("coherent", alpha=1 + 0j), 1.0, **inverse))
        return abs(calibration["c"] - c_check) / abs(calibration["c"])

    checks.append(_measure("quadratic calibrated round trip", 5e-2, calibrated_round_trip))
    checks.append(_measure("quadratic calibration stability", cfg["calibration_tol"], calibration_spread))
    return checks


# quantum


def _commuting_square_values(spec: StateSpec, scheme: str, dim: int, cfg: dict) -> tuple[np.ndarray, np.ndarray]:
    """Quantum symbols of the state and the classical transform of its Wigner function.

    The Wigner function comes from the Weyl symbol of the truncated density matrix.
    """
    rho = density_from_state(spec, dim, cfg["leakage_tol"])
    wigner = weyl_to_wigner(weyl_symbol_grid(rho, make_grid(-9.0, 9.0, -9.0, 9.0, 181, 181)))
    if scheme == "symplectic":
        X = np.linspace(-3.0, 3.0, 7)
        points = [TomographicPoint.from_angle(x, t) for t in (0.0, 0.7, 2.0) for x in X]
        classical = [radon_forward_points(wigner, x.X, x.mu, x.nu) for x in points]
    else:
        X = np.linspace(0.25, 4.0, 6)
        points = [TomographicPoint(x, m, n) for m, n in ((0.0, 0.0), (0.5, -0.3)) for x in X]
        classical = [circle_forward_points(wigner, x.X, x.mu, x.nu) for x in points]
    quantum = [tomographic_symbol(rho, scheme, x) for x in points]
    return np.asarray(quantum, dtype=complex), np.asarray(classical, dtype=complex)


def _weyl_round_trip(spec: StateSpec, dim: int, cfg: dict) -> float:
    rho = density_from_state(spec, dim, cfg["leakage_tol"])
    symbol = weyl_symbol_grid(rho, make_grid(-9.0, 9.0, -9.0, 9.0, 181, 181))
    return (weyl_reconstruct(symbol, dim) - rho).norm()


def _symplectic_lattice_symbol(rho):
    X = np.linspace(-8.0, 8.0, 321)
    theta = np.linspace(0.0, np.pi, 48, endpoint=False)
    like = symplectic_tomogram(X, theta, np.zeros((len(theta), len(X))))
    return tomographic_symbol_grid(rho, like)


def _quadratic_lattice_symbol(rho):
    X = np.linspace(0.0, 160.0, 801)
    centers = np.linspace(-5.0, 5.0, 41)
    like = quadratic_tomogram(X, centers, centers, np.zeros((len(centers), len(centers), len(X))))
    return tomographic_symbol_grid(rho, like)


def _operator_round_trip(spec: StateSpec, dim: int, scheme: str, cfg: dict) -> float:
    """Frobenius error of the reconstruction relative to the norm of the density matrix."""
    rho = density_from_state(spec, dim, cfg["leakage_tol"])
    if scheme == "symplectic":
        reconstructed = operator_from_tomogram(_symplectic_lattice_symbol(rho), dim, min_angles=cfg["min_angles"])
    else:
        reconstructed = operator_from_tomogram(
            _quadratic_lattice_symbol(rho), dim, cfg["inverse_constant"], cfg["x_cutoff_rel"]
        )
    return (reconstructed - rho).norm() / rho.norm()


def _purity(rho, sigma, dim: int) -> complex:
    return star_trace(star_product(_symplectic_lattice_symbol(rho), _symplectic_lattice_symbol(sigma), dim=dim))


def _associativity(dim: int) -> np.ndarray:
    a, b, c = (_symplectic_lattice_symbol(coherent_density(alpha, dim)) for alpha in (0.3, -0.2j, 0.1 + 0.1j))
    left = star_product(star_product(a, b, dim=dim), c, dim=dim)
    right = star_product(a, star_product(b, c, dim=dim), dim=dim)
    return np.stack([left.values, right.values])


def truncation_shift(small, large) -> float:
    """How far a result moves when the Fock cutoff grows.

    Operators are compared after zero padding the smaller one, arrays by their
    largest relative change, scalars by their absolute change.
    """
    if isinstance(small, Operator):
        padded = np.zeros_like(large.matrix)
        padded[: small.dim, : small.dim] = small.matrix
        return float(np.linalg.norm(padded - large.matrix))
    if np.ndim(small) == 0:
        return float(abs(complex(small) - complex(large)))
    return _rel_max(small, large)


def _at_truncations(
    name: str, tol: float, shift_tol: float, compute: Callable, error: Callable, dim: int, dim_check: int
) -> list[Check]:
    """Checks of ``error(compute(d))`` at both cutoffs plus the shift between them."""
    results = {}

    def at(d):
        def measure():
            results[d] = compute(d)
            return error(results[d])

        return measure

    checks = [_measure(f"{name} at dim {d}", tol, at(d)) for d in (dim, dim_check)]
    if all(d in results for d in (dim, dim_check)):
        shift = lambda: truncation_shift(results[dim], results[dim_check])  # noqa: E731
    else:
        shift = lambda: np.nan  # noqa: E731
    checks.append(_measure(f"{name} truncation shift {dim}->{dim_check}", shift_tol, shift))
    return checks


def quantum_suite(seed: int, dim: int, dim_check: int | None = None, config: dict | None = None) -> list[Check]:
    cfg = _settings(config)
    dim_check = cfg["dim_check"] if dim_check is None else dim_check
    if dim_check <= dim:
        logger.warning("Check cutoff %d does not exceed dim %d, using %d", dim_check, dim, dim + 8)
        dim_check = dim + 8
    checks = []
    for scheme, tol in (("symplectic", 1e-3), ("quadratic", 2e-3)):
        for spec in QUANTUM_STATES:
            checks += _at_truncations(
                f"{scheme} symbol of {spec.to_dict()}",
                tol,
                tol,
                lambda d, s=spec, sc=scheme: _commuting_square_values(s, sc, d, cfg),
                lambda values: _rel_max(*values),
                dim,
                dim_check,
            )
    for spec in QUANTUM_STATES:
        checks.append(
            _measure(f"weyl round trip {spec.to_dict()}", 1e-6, lambda s=spec: _weyl_round_trip(s, dim, cfg))
        )
        checks.append(
            _measure(
                f"operator from symplectic tomogram {spec.to_dict()}",
                1e-3,
                lambda s=spec: _operator_round_trip(s, dim, "symplectic", cfg),
            )
        )
    checks.append(
        _measure(
            "operator from quadratic tomogram |0>",
            5e-2,
            lambda: _operator_round_trip(StateSpec("fock", n=0), dim, "quadratic", cfg),
        )
    )
    for label, left, right, expected in (
        ("star-trace purity |0>", 0, 0, 1.0),
        ("star-trace purity |1>", 1, 1, 1.0),
        ("star-trace overlap <0|1>", 0, 1, 0.0),
    ):
        checks += _at_truncations(
            label,
            1e-2,
            1e-3,
            lambda d, a=left, b=right: _purity(fock_density(a, d), fock_density(b, d), d),
            lambda value, e=expected: abs(value - e),
            dim,
            dim_check,
        )
    checks += _at_truncations(
        "star associativity", 1e-2, 1e-3, _associativity, lambda pair: _rel_max(pair[0], pair[1]), dim, dim_check
    )
    checks += _at_truncations(
        "operator from symplectic tomogram |1>",
        1e-3,
        1e-3,
        lambda d: operator_from_tomogram(
            _symplectic_lattice_symbol(fock_density(1, d)), d, min_angles=cfg["min_angles"]
        ),
        lambda op: (op - fock_density(1, op.dim)).norm(),
        dim,
        dim_check,
    )
    return checks


# kernels


def _direction(rng: np.random.Generator, low: float = 0.5, high: float = 1.2) -> np.ndarray:
    angle = rng.uniform(0.0, 2.0 * np.pi)
    return rng.uniform(low, high) * np.array([np.cos(angle), np.sin(angle)])


def symplectic_points(rng: np.random.Generator, spread: float, count: int = 5):
    """Kernel arguments on the support m1 + m2 + k m3 = 0, up to noise of size ``spread``."""
    points = []
    for _ in range(count):
        m1, m3 = _direction(rng), _direction(rng)
        k = rng.uniform(0.5, 1.5)
        m2 = -m1 - k * m3 + spread * rng.normal(size=2)
        X1, X2, X3 = rng.uniform(-1.0, 1.0, 3)
        points.append(
            (TomographicPoint(X1, *m1), TomographicPoint(X2, *m2), TomographicPoint(X3, *m3))
        )
    return points


def quadratic_points(rng: np.random.Generator, eps: float, count: int = 5):
    """Kernel arguments with X3 near the circle support, the all-zero point first."""
    zero = TomographicPoint(0.0, 0.0, 0.0)
    points = [(zero, zero, zero)]
    for _ in range(count - 1):
        m1, m2, m3 = (rng.uniform(-0.6, 0.6, 2) for _ in range(3))
        support = (
            (m1[0] + m2[0] - 2.0 * m3[0] + m2[1] - m1[1]) ** 2
            + (m1[1] + m2[1] - 2.0 * m3[1] + m1[0] - m2[0]) ** 2
        ) / 4.0
        X1, X2 = rng.uniform(-1.0, 1.0, 2)
        X3 = support + rng.uniform(-0.5, 0.5) * eps
        points.append((TomographicPoint(X1, *m1), TomographicPoint(X2, *m2), TomographicPoint(X3, *m3)))
    return points


def _agreement(closed: Callable, oracle: Callable, points, test: TestFunction) -> float:
    reference = [oracle(*x, test) for x in points]
    values = [closed(*x, test) for x in points]
    return _rel_max(values, reference)


def _groenewald_identities(rng: np.random.Generator) -> float:
    z = rng.normal(size=(3, 2))
    value = groenewald(*z[0], *z[1], *z[2])
    cyclic = groenewald(*z[1], *z[2], *z[0])
    diagonal = groenewald(*z[0], *z[0], *z[1])
    return max(abs(value - cyclic), abs(abs(value) - 1.0 / np.pi**2), abs(diagonal - 1.0 / np.pi**2))


def _twist_modulus(rng: np.random.Generator) -> float:
    errors = []
    for _ in range(5):
        K = complex(*rng.normal(size=2))
        mu1, nu1, mu2, nu2 = rng.normal(size=4)
        errors.append(abs(abs(twist_apply(K, mu1, nu1, mu2, nu2)) - abs(K)))
    return max(errors)


def _twist_paths(rng: np.random.Generator) -> float:
    test = TestFunction(0.3, 1e-2)
    points = symplectic_points(rng, 0.1 * test.eta)
    quantum = [kernel_symplectic(*x, test) for x in points]
    twisted = [twist_apply(kernel_symplectic_classical(*x, test), x[0].mu, x[0].nu, x[1].mu, x[1].nu) for x in points]
    return _rel_max(twisted, quantum)


def _asymmetry_witness(eps: float) -> float:
    """Shortfall of the swap asymmetry below a tenth of the kernel scale; passes when <= 0."""
    test = TestFunction(eps)
    x1 = TomographicPoint(0.0, 1.0, 0.0)
    x2 = TomographicPoint(0.0, 0.0, 0.0)
    x3 = TomographicPoint(0.5, 0.0, 1.0)
    forward = kernel_quadratic(x1, x2, x3, test)
    swapped = kernel_quadratic(x2, x1, x3, test)
    scale = max(abs(forward), abs(swapped))
    return 0.1 * scale - abs(forward - swapped)


def kernel_suite(seed: int, config: dict | None = None) -> list[Check]:
    cfg = _settings(config)
    damping = tuple(cfg["kernel_damping_levels"])
    rng = np.random.default_rng(seed)
    checks = [
        _measure("groenewald identities", 1e-12, lambda: _groenewald_identities(rng)),
        _measure("twist preserves modulus", 1e-10, lambda: _twist_modulus(rng)),
        _measure("twist relates quantum and classical kernels", 1e-2, lambda: _twist_paths(rng)),
    ]

    oracle_test = TestFunction(0.3, 0.5)
    checks.append(
        _measure(
            "symplectic closed form vs composition",
            1e-2,
            lambda: _agreement(
                KernelEvaluator("symplectic"),
                KernelEvaluator("symplectic", "oracle", damping_levels=damping),
                symplectic_points(rng, oracle_test.eta),
                oracle_test,
            ),
        )
    )

    window = WindowFunction("rectangular", 1.0)
    ideal = KernelEvaluator("symplectic")
    checks.append(
        _measure(
            "thick kernel smearing identity",
            1e-2,
            lambda: _agreement(
                lambda *a: kernel_thick(ideal, window, *a),
                KernelEvaluator("thick", "oracle", window, damping_levels=damping),
                symplectic_points(rng, oracle_test.eta),
                oracle_test,
            ),
        )
    )

    quadratic_test = TestFunction(0.3)
    checks.append(
        _measure(
            "quadratic closed form vs composition",
            1e-2,
            lambda: _agreement(
                KernelEvaluator("quadratic"),
                KernelEvaluator("quadratic", "oracle", damping_levels=damping),
                quadratic_points(rng, quadratic_test.eps),
                quadratic_test,
            ),
        )
    )
    checks.append(_measure("quadratic kernel noncommutativity", 0.0, lambda: _asymmetry_witness(quadratic_test.eps)))
    return checks


def run_suite(
    suite: str = "all",
    seed: int | None = None,
    dim: int | None = None,
    dim_check: int | None = None,
    config: dict | None = None,
) -> dict:
    """Run a suite and return its JSON-ready report."""
    cfg = _settings(config)
    seed = cfg["seed"] if seed is None else seed
    dim = cfg["dim"] if dim is None else dim
    dim_check = cfg["dim_check"] if dim_check is None else dim_check
    if suite not in SUITES:
        raise InvalidInput(f"Unknown suite '{suite}', expected one of {SUITES}")
    checks = []
    if suite in ("classical", "all"):
        checks += classical_suite(seed, cfg)
    if suite in ("quantum", "all"):
        checks += quantum_suite(seed, dim, dim_check, cfg)
    if suite in ("kernels", "all"):
        checks += kernel_suite(seed, cfg)
    failed = [c.name for c in checks if not c.passed]
    logger.info("Suite %s: %d checks, %d failed", suite, len(checks), len(failed))
    return {
        "suite": suite,
        "seed": seed,
        "dim": dim,
        "dim_check": dim_check,
        "passed": not failed,
        "failed": failed,
        "checks": [asdict(c) for c in checks],
    }
