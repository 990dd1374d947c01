"""JSON experiment configuration.

Example::

    {
      "P": [[0, 0.1, 0.2, 0.7], [0.25, 0, 0.25, 0.5], [0.5, 0.5, 0, 0], [0.2, 0, 0.8, 0]],
      "sigma2": [0.1024, 0.1225, 0.1444, 0.0841],
      "z0": "uniform:0.5",
      "seed": 22,
      "seeds": [1, 2, 3]
    }

``z0`` is a list of numbers, ``"uniform:c"`` or ``"zstar:alpha"``. Error
paths index arrays from zero, so ``P[2]`` is the third row.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .network import ROW_SUM_TOL

KNOWN_FIELDS = {
    "P", "sigma2", "theta", "z0", "seed", "seeds", "max_steps", "tol_fp",
    "record_every", "output_dir", "t_max", "replicates", "noise",
}


@dataclass
class ExperimentConfig:
    P: list
    sigma2: list
    theta: float = 0.0
    z0: object = None
    seed: int = 0
    seeds: list | None = None
    max_steps: int = 10**6
    tol_fp: float = 1e-12
    record_every: int = 1
    output_dir: str = "."
    t_max: int = 200
    replicates: int | None = None
    noise: str = "gaussian"

    @property
    def n(self):
        return len(self.P)


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _integer(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be at least {minimum}")
    return value


def _vector(value, path, n):
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list of numbers")
    if len(value) != n:
        raise ConfigError(path, f"expected {n} entries, got {len(value)}")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("$", "configuration must be a JSON object")
    unknown = set(data) - KNOWN_FIELDS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    if "P" not in data:
        raise ConfigError("P", "missing required field")
    P = data["P"]
    if not isinstance(P, list) or not P:
        raise ConfigError("P", "expected a nonempty list of rows")
    n = len(P)
    rows = []
    for i, row in enumerate(P):
        row = _vector(row, f"P[{i}]", n)
        for j, v in enumerate(row):
            if v < 0:
                raise ConfigError(f"P[{i}][{j}]", "weights must be nonnegative")
        if abs(sum(row) - 1.0) > ROW_SUM_TOL:
            raise ConfigError(f"P[{i}]", f"row sums to {sum(row)!r}, expected 1")
        rows.append(row)
    if "sigma2" not in data:
        raise ConfigError("sigma2", "missing required field")
    sigma2 = _vector(data["sigma2"], "sigma2", n)
    for i, v in enumerate(sigma2):
        if v <= 0:
            raise ConfigError(f"sigma2[{i}]", "variances must be positive")

    cfg = ExperimentConfig(P=rows, sigma2=sigma2)
    if "theta" in data:
        cfg.theta = _number(data["theta"], "theta")
    z0 = data.get("z0")
    if isinstance(z0, list):
        z0 = _vector(z0, "z0", n)
        for i, v in enumerate(z0):
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"z0[{i}]", "self-confidence must lie in [0, 1]")
    elif isinstance(z0, str):
        kind, _, arg = z0.partition(":")
        if kind not in ("uniform", "zstar"):
            raise ConfigError("z0", f"unknown preset {kind!r}")
        try:
            float(arg)
        except ValueError:
            raise ConfigError("z0", f"preset argument {arg!r} is not a number") from None
    elif z0 is not None:
        raise ConfigError("z0", "expected a list or a preset string")
    cfg.z0 = z0
    if "seed" in data:
        cfg.seed = _integer(data["seed"], "seed", 0)
    if "seeds" in data:
        seeds = data["seeds"]
        if not isinstance(seeds, list):
            raise ConfigError("seeds", "expected a list of integers")
        cfg.seeds = [_integer(s, f"seeds[{i}]", 0) for i, s in enumerate(seeds)]
    if "max_steps" in data:
        cfg.max_steps = _integer(data["max_steps"], "max_steps", 1)
    if "tol_fp" in data:
        cfg.tol_fp = _number(data["tol_fp"], "tol_fp")
        if cfg.tol_fp <= 0:
            raise ConfigError("tol_fp", "must be positive")
    if "record_every" in data:
        cfg.record_every = _integer(data["record_every"], "record_every", 1)
    if "output_dir" in data:
        if not isinstance(data["output_dir"], str):
            raise ConfigError("output_dir", "expected a path string")
        cfg.output_dir = data["output_dir"]
    if "t_max" in data:
        cfg.t_max = _integer(data["t_max"], "t_max", 0)
    if data.get("replicates") is not None:
        cfg.replicates = _integer(data["replicates"], "replicates", 2)
    if "noise" in data:
        if data["noise"] not in ("gaussian", "uniform"):
            raise ConfigError("noise", "expected 'gaussian' or 'uniform'")
        cfg.noise = data["noise"]
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("$", f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from exc
    return parse_config(data)


def resolve_z0(cfg: ExperimentConfig, segment=None) -> np.ndarray | None:
    """Turn the ``z0`` field into a profile; ``zstar:`` presets need the Pareto segment."""
    z0 = cfg.z0
    if z0 is None or isinstance(z0, list):
        return None if z0 is None else np.array(z0, dtype=float)
    kind, _, arg = z0.partition(":")
    value = float(arg)
    if kind == "uniform":
        if not 0.0 <= value <= 1.0:
            raise ConfigError("z0", f"uniform value {value!r} outside [0, 1]")
        return np.full(cfg.n, value)
    if segment is None:
        raise ConfigError("z0", "zstar preset needs the network")
    if not 0.0 < value <= segment.alpha_star:
        raise ConfigError("z0", f"alpha={value!r} outside (0, {segment.alpha_star!r}]")
    return segment.profile(value)
