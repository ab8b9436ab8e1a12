"""Entry point for the ``tomo`` command."""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from tomostar.config import load_config
from tomostar.errors import InvalidInput, TomographyError
from tomostar.fileio import (
    load_grid,
    load_state,
    load_window,
    parse_range,
    read_calibration,
    read_json,
    read_tomogram,
    write_calibration,
    write_json,
    write_phase_function,
    write_tomogram,
)
from tomostar.kernels import evaluate_request
from tomostar.operators import density_from_state, operator_from_tomogram, tomographic_symbol_grid
from tomostar.phase_space import eval_state, make_grid
from tomostar.quadratic import calibrate_inverse_constant, circle_forward_grid, quadratic_inverse, quadratic_tomogram
from tomostar.symplectic import radon_forward_grid, radon_inverse, symplectic_tomogram
from tomostar.thick import thick_forward_grid
from tomostar.verify import SUITES, run_suite

logger = logging.getLogger(__name__)

SOURCE_HALF_WIDTH = 9.0
SOURCE_POINTS = 181


def _source_grid(args, spec):
    if args.source_grid:
        return load_grid(args.source_grid)
    q0, p0 = spec.center
    h = SOURCE_HALF_WIDTH
    return make_grid(q0 - h, q0 + h, p0 - h, p0 + h, SOURCE_POINTS, SOURCE_POINTS)


def _print_masses(w) -> None:
    masses = np.real(w.slice_masses())
    print(f"slice masses: min {masses.min():.6g}, max {masses.max():.6g}, {masses.size} slices")


def cmd_forward(args, config) -> int:
    spec = load_state(args.state)
    X = parse_range(args.X or ("0:160:801" if args.scheme == "quadratic" else "-6:6:121"))
    if args.quantum:
        rho = density_from_state(spec, args.dim or config["dim"], config["leakage_tol"])
        if args.scheme == "quadratic":
            mu, nu = parse_range(args.mu), parse_range(args.nu)
            like = quadratic_tomogram(X, mu, nu, np.zeros((len(mu), len(nu), len(X))))
        elif args.scheme == "symplectic":
            theta = parse_range(args.theta, endpoint=False)
            like = symplectic_tomogram(X, theta, np.zeros((len(theta), len(X))))
        else:
            raise InvalidInput("Quantum symbols are computed for the symplectic and quadratic schemes")
        w = tomographic_symbol_grid(rho, like)
    else:
        f = eval_state(spec, _source_grid(args, spec))
        if args.scheme == "quadratic":
            w = circle_forward_grid(f, X, parse_range(args.mu), parse_range(args.nu))
        else:
            theta = parse_range(args.theta, endpoint=False)
            if args.scheme == "thick":
                if not args.window:
                    raise InvalidInput("The thick scheme needs --window")
                w = thick_forward_grid(f, load_window(args.window), X, theta)
            else:
                w = radon_forward_grid(f, X, theta, config["radon_step_factor"])
    write_tomogram(args.output, w)
    _print_masses(w)
    return 0


def _target_grid(args):
    if args.grid:
        return load_grid(args.grid)
    q, p = parse_range(args.q), parse_range(args.p)
    return make_grid(q[0], q[-1], p[0], p[-1], len(q), len(p))


def cmd_invert(args, config) -> int:
    w = read_tomogram(args.tomogram)
    c = None
    if w.scheme == "quadratic":
        if not args.calib:
            raise InvalidInput("Quadratic tomograms need the inverse constant: run 'tomo calibrate' and pass --calib")
        c = read_calibration(args.calib)
    if args.operator:
        rho = operator_from_tomogram(
            w, args.dim or config["dim"], c, config["x_cutoff_rel"], config["min_angles"]
        )
        write_json(args.output, rho.to_dict())
        print(f"trace {rho.trace().real:.6g}, hermiticity defect {rho.hermiticity_defect():.3g}")
        return 0

    grid = _target_grid(args)
    if w.scheme in ("symplectic", "thick"):
        f = radon_inverse(w, grid, config["min_angles"], config["hann_start"])
    elif w.scheme == "quadratic":
        f = quadratic_inverse(
            w, grid, config["damping_levels"], c, config["inverse_boundary_tol"], config["x_cutoff_rel"]
        )
    else:
        raise InvalidInput(f"Phase-space inversion of '{w.scheme}' tomograms is not supported")
    write_phase_function(args.output, f)
    if args.reference:
        reference = eval_state(load_state(args.reference), grid).values
        error = np.linalg.norm(f.values - reference) / np.linalg.norm(reference)
        logger.info("Round-trip error against %s: %.3g", args.reference, error)
        print(f"relative L2 error: {error:.6g}")
    return 0


def cmd_kernel(args, config) -> int:
    request = read_json(args.request)
    if args.mode:
        request["mode"] = args.mode
    request.setdefault("test", {})
    request["test"].setdefault("eps", config["test_eps"])
    request["test"].setdefault("eta", config["direction_width"])
    value = evaluate_request(request, tuple(config["kernel_damping_levels"]))
    result = {"re": value.real, "im": value.imag}
    if args.output:
        write_json(args.output, result)
    print(json.dumps(result))
    return 0


def cmd_calibrate(args, config) -> int:
    c = calibrate_inverse_constant(
        tol=config["calibration_tol"],
        damping_levels=config["damping_levels"],
        x_cutoff_rel=config["x_cutoff_rel"],
    )
    write_calibration(args.output, c, reference={"kind": "coherent", "alpha": [0.0, 0.0]})
    print(f"inverse constant c = {c:.6g}")
    return 0


def cmd_verify(args, config) -> int:
    seed = config["seed"] if args.seed is None else args.seed
    report = run_suite(args.suite, seed, args.dim or config["dim"], config["dim_check"], config)
    if args.output:
        write_json(args.output, report)
    print(json.dumps(report, indent=2))
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tomo", description="Tomostar - tomograms, reconstructions and star-product kernels")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--config", type=Path, help="Config file (default: $XDG_CONFIG_HOME/tomostar/config.json)")
    sub = parser.add_subparsers(dest="command", required=True)

    forward = sub.add_parser("forward", help="Compute the tomogram of a test state")
    forward.add_argument("--scheme", choices=("symplectic", "thick", "quadratic"), default="symplectic")
    forward.add_argument("--state", required=True, help="State JSON file")
    forward.add_argument("--window", help="Window JSON (file or inline) for the thick scheme")
    forward.add_argument("--X", help="X lattice lo:hi:count")
    forward.add_argument("--theta", default="0:pi:64", help="Angles lo:hi:count, upper end excluded")
    forward.add_argument("--mu", default="-5:5:41", help="Circle centers in q, lo:hi:count")
    forward.add_argument("--nu", default="-5:5:41", help="Circle centers in p, lo:hi:count")
    forward.add_argument("--source-grid", help="Grid JSON the state is sampled on")
    forward.add_argument("--quantum", action="store_true", help="Use Tr(rho phi(x)) of the density operator")
    forward.add_argument("--dim", type=int, help="Fock truncation for --quantum")
    forward.add_argument("-o", "--output", required=True)
    forward.set_defaults(handler=cmd_forward)

    invert = sub.add_parser("invert", help="Reconstruct a phase-space function or operator from a tomogram CSV")
    invert.add_argument("tomogram")
    invert.add_argument("--grid", help="Target grid JSON")
    invert.add_argument("--q", default="-5:5:101")
    invert.add_argument("--p", default="-5:5:101")
    invert.add_argument("--calib", help="Calibration JSON from 'tomo calibrate'")
    invert.add_argument("--reference", help="State JSON to report the round-trip error against")
    invert.add_argument("--operator", action="store_true", help="Write the density operator instead")
    invert.add_argument("--dim", type=int)
    invert.add_argument("-o", "--output", required=True)
    invert.set_defaults(handler=cmd_invert)

    kernel = sub.add_parser("kernel", help="Evaluate a smeared star-product kernel")
    kernel.add_argument("--request", required=True, help="Kernel request JSON (file or inline)")
    kernel.add_argument("--mode", choices=("closed", "oracle"))
    kernel.add_argument("-o", "--output")
    kernel.set_defaults(handler=cmd_kernel)

    calibrate = sub.add_parser("calibrate", help="Fit the quadratic inverse constant")
    calibrate.add_argument("-o", "--output", required=True)
    calibrate.set_defaults(handler=cmd_calibrate)

    verify = sub.add_parser("verify", help="Run the property suites")
    verify.add_argument("--suite", choices=SUITES, default="all")
    verify.add_argument("--dim", type=int)
    verify.add_argument("--seed", type=int)
    verify.add_argument("-o", "--output")
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.DEBUG if args.debug else logging.INFO
    logging.basicConfig(
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
        level=level,
    )

    try:
        try:
            config = load_config(args.config)
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidInput(f"Cannot load config: {e}") from e
        return args.handler(args, config)
    except TomographyError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
