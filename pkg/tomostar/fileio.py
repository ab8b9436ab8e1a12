"""CSV and JSON formats for states, grids, windows, tomograms and reconstructions."""

import csv
import json
import logging
from pathlib import Path

import numpy as np

from tomostar.errors import InvalidInput
from tomostar.operators import Operator
from tomostar.phase_space import PhaseSpaceFunction, PhaseSpaceGrid, StateSpec, make_grid
from tomostar.symplectic import SCHEME_AXES, Tomogram
from tomostar.thick import WindowFunction

logger = logging.getLogger(__name__)

TOMOGRAM_COLUMNS = {
    "symplectic": ("X", "theta", "mu", "nu", "value"),
    "thick": ("X", "theta", "mu", "nu", "value"),
    "quadratic": ("X", "mu", "nu", "value"),
}
PHASE_COLUMNS = ("q", "p", "re", "im")


def parse_number(text: str) -> float:
    """Float literal, optionally written with pi: ``pi``, ``-pi``, ``2pi``, ``2*pi``, ``pi/2``."""
    text = text.strip().lower().replace("*", "")
    try:
        if "pi" not in text:
            return float(text)
        head, _, tail = text.partition("pi")
        factor = {"": 1.0, "-": -1.0, "+": 1.0}.get(head)
        factor = float(head) if factor is None else factor
        divisor = float(tail[1:]) if tail.startswith("/") else 1.0
        if tail and not tail.startswith("/"):
            raise ValueError(text)
        return factor * np.pi / divisor
    except ValueError as e:
        raise InvalidInput(f"Cannot read number '{text}'") from e


def parse_range(text: str, endpoint: bool = True) -> np.ndarray:
    """Lattice from ``lo:hi:count``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidInput(f"Range '{text}' must look like lo:hi:count")
    lo, hi = parse_number(parts[0]), parse_number(parts[1])
    try:
        count = int(parts[2])
    except ValueError as e:
        raise InvalidInput(f"Range count '{parts[2]}' is not an integer") from e
    if count < 2:
        raise InvalidInput(f"Range '{text}' needs at least 2 samples")
    if not lo < hi:
        raise InvalidInput(f"Range '{text}' must have lo < hi")
    return np.linspace(lo, hi, count, endpoint=endpoint)


def read_json(source: str | Path) -> dict:
    """Parse a JSON file, or inline JSON text when ``source`` starts with '{'."""
    text = str(source)
    try:
        if text.lstrip().startswith("{"):
            return json.loads(text)
        with open(source, "r") as f:
            return json.load(f)
    except OSError as e:
        raise InvalidInput(f"Cannot read {source}: {e}") from e
    except json.JSONDecodeError as e:
        raise InvalidInput(f"Invalid JSON in {source}: {e}") from e


def write_json(path: str | Path, data: dict) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=2)


def load_state(source) -> StateSpec:
    return StateSpec.from_dict(read_json(source))


def load_grid(source) -> PhaseSpaceGrid:
    return PhaseSpaceGrid.from_dict(read_json(source))


def load_window(source) -> WindowFunction:
    return WindowFunction.from_dict(read_json(source))


def load_operator(source) -> Operator:
    return Operator.from_dict(read_json(source))


def read_calibration(source) -> float:
    data = read_json(source)
    try:
        return float(data["c"])
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInput(f"Calibration file {source} has no constant 'c'") from e


def write_calibration(path, c: float, **extra) -> None:
    write_json(path, {"c": c, **extra})


def write_tomogram(path: str | Path, w: Tomogram) -> None:
    columns = TOMOGRAM_COLUMNS[w.scheme]
    values = np.asarray(w.values)
    complex_values = np.iscomplexobj(values) and not np.allclose(values.imag, 0.0)
    X, mu, nu = w.points
    flat = values.ravel()
    with open(path, "w", newline="") as f:
        f.write(f"# scheme={w.scheme}\n")
        if w.window is not None:
            f.write(f"# window={json.dumps(w.window.to_dict())}\n")
        writer = csv.writer(f)
        writer.writerow(columns + (("value_im",) if complex_values else ()))
        if w.scheme == "quadratic":
            rows = zip(X, mu, nu, flat.real)
        else:
            theta = np.repeat(w.axes["theta"], len(w.X))
            rows = zip(X, theta, mu, nu, flat.real)
        for row, value in zip(rows, flat):
            writer.writerow([repr(float(v)) for v in row] + ([repr(float(value.imag))] if complex_values else []))
    logger.info("Wrote %s tomogram with %d rows to %s", w.scheme, flat.size, path)


def _read_header(f) -> tuple[dict, list[str]]:
    meta = {}
    lines = []
    for line in f:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
        elif line.strip():
            lines.append(line)
    return meta, lines


def read_tomogram(path: str | Path) -> Tomogram:
    """Read a tomogram CSV back onto its structured lattice."""
    try:
        with open(path, "r", newline="") as f:
            meta, lines = _read_header(f)
    except OSError as e:
        raise InvalidInput(f"Cannot read {path}: {e}") from e
    scheme = meta.get("scheme")
    if scheme not in TOMOGRAM_COLUMNS:
        raise InvalidInput(f"{path} has no valid '# scheme=' header line")
    reader = csv.DictReader(lines)
    rows = list(reader)
    if not rows:
        raise InvalidInput(f"{path} contains no tomogram rows")
    missing = set(TOMOGRAM_COLUMNS[scheme]) - set(reader.fieldnames or [])
    if missing:
        raise InvalidInput(f"{path} is missing columns {sorted(missing)}")
    try:
        table = {name: np.array([float(r[name]) for r in rows]) for name in reader.fieldnames}
    except (TypeError, ValueError) as e:
        raise InvalidInput(f"{path} contains a non-numeric value: {e}") from e
    values = table["value"] + (1j * table["value_im"] if "value_im" in table else 0.0)

    names = SCHEME_AXES[scheme]
    axes = {name: np.unique(table[name]) for name in names}
    shape = tuple(len(axes[name]) for name in names)
    if int(np.prod(shape)) != len(rows):
        raise InvalidInput(f"{path} does not fill a {' x '.join(names)} lattice")
    index = tuple(np.searchsorted(axes[name], table[name]) for name in names)
    grid = np.zeros(shape, dtype=values.dtype)
    grid[index] = values
    window = WindowFunction.from_dict(json.loads(meta["window"])) if "window" in meta else None
    if scheme == "thick" and window is None:
        raise InvalidInput(f"{path} is a thick tomogram without a '# window=' header line")
    return Tomogram(scheme, axes, grid, window)


def write_phase_function(path: str | Path, f: PhaseSpaceFunction) -> None:
    Q, P = f.grid.mesh()
    with open(path, "w", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(PHASE_COLUMNS)
        for q, p, v in zip(Q.ravel(), P.ravel(), f.values.ravel()):
            writer.writerow([repr(float(q)), repr(float(p)), repr(float(v.real)), repr(float(v.imag))])
    logger.info("Wrote %dx%d phase-space samples to %s", f.grid.n_q, f.grid.n_p, path)


def read_phase_function(path: str | Path) -> PhaseSpaceFunction:
    try:
        with open(path, "r", newline="") as f:
            rows = list(csv.DictReader(f))
    except OSError as e:
        raise InvalidInput(f"Cannot read {path}: {e}") from e
    if not rows:
        raise InvalidInput(f"{path} contains no samples")
    try:
        table = {name: np.array([float(r[name]) for r in rows]) for name in PHASE_COLUMNS}
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInput(f"{path} is not a q, p, re, im table: {e}") from e
    q, p = np.unique(table["q"]), np.unique(table["p"])
    if len(q) * len(p) != len(rows):
        raise InvalidInput(f"{path} does not fill a q x p grid")
    grid = make_grid(q[0], q[-1], p[0], p[-1], len(q), len(p))
    values = np.zeros(grid.shape, dtype=complex)
    values[np.searchsorted(q, table["q"]), np.searchsorted(p, table["p"])] = table["re"] + 1j * table["im"]
    return PhaseSpaceFunction(grid, values, "file")
