"""Configuration management for tomostar."""

import json
import math
import os
from pathlib import Path

DEFAULT_CONFIG = {
    "dim": 16,
    "dim_check": 24,
    "leakage_tol": 1e-6,
    "radon_step_factor": 0.5,
    "hann_start": 0.8,
    "min_angles": 8,
    "damping_levels": [0.4, 0.2, 0.1],
    "kernel_damping_levels": [0.04, 0.02, 0.01],
    "x_cutoff_rel": 1e-8,
    "inverse_boundary_tol": 1e-2,
    "inverse_constant": 1.0 / math.pi,
    "calibration_tol": 0.05,
    "seed": 7,
    "test_eps": 0.05,
    "direction_width": 0.5,
}


def get_config_dir() -> Path:
    """Return the configuration directory, creating it if needed."""
    config_dir = Path(os.environ.get("XDG_CONFIG_HOME", Path.home() / ".config")) / "tomostar"
    config_dir.mkdir(parents=True, exist_ok=True)
    return config_dir


def get_config_path() -> Path:
    """Return the path to the config file."""
    return get_config_dir() / "config.json"


def load_config(path: Path | None = None) -> dict:
    """Load config from disk, merged over the defaults.

    Without an explicit path the default file is created when it doesn't exist.
    """
    if path is not None:
        with open(path, "r") as f:
            stored = json.load(f)
        return {**DEFAULT_CONFIG, **stored}

    path = get_config_path()
    if path.exists():
        with open(path, "r") as f:
            stored = json.load(f)
        # Merge with defaults so new keys are always present
        config = {**DEFAULT_CONFIG, **stored}
    else:
        config = DEFAULT_CONFIG.copy()
        save_config(config)
    return config


def save_config(config: dict, path: Path | None = None) -> None:
    """Write config to disk."""
    path = path or get_config_path()
    with open(path, "w") as f:
        json.dump(config, f, indent=2, ensure_ascii=False)
