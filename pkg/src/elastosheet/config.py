"""JSON run configuration and its validation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .core_state import FixedSoundSpeed, GammaLaw, PlanarBackground
from .errors import DomainError

DEFAULT_GRID = {"theta_points": 360, "delta_points": 1201, "gamma_levels": [1e-2, 1e-3, 1e-4]}
DEFAULT_TOLERANCES = {"det_zero": 1e-6, "eig_residual": 1e-10, "diag_residual": 1e-9, "root_refine": 1e-12,
                      "schur_residual": 1e-8, "factored_residual": 1e-8}
SWEEP_PARAMETERS = ("vbar", "f_scale", "c")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class Sweep:
    parameter: str
    start: float
    stop: float
    steps: int


@dataclass(frozen=True)
class RunConfig:
    background: PlanarBackground
    grid: dict
    tolerances: dict
    sweep: Optional[Sweep] = None
    seed: int = 0
    oracle: dict = field(default_factory=dict)


def _number(d, key, path, positive=False, nonneg=False):
    if key not in d:
        raise ConfigError(f"{path}{key}", "missing required key")
    x = d[key]
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"{path}{key}", f"expected a finite number, got {x!r}")
    if positive and not x > 0:
        raise ConfigError(f"{path}{key}", f"must be positive, got {x}")
    if nonneg and not x >= 0:
        raise ConfigError(f"{path}{key}", f"must be nonnegative, got {x}")
    return float(x)


def _row(d, key, path):
    if key not in d:
        raise ConfigError(f"{path}{key}", "missing required key")
    x = d[key]
    if not isinstance(x, list) or len(x) != 3 or not all(
            isinstance(a, (int, float)) and not isinstance(a, bool) and math.isfinite(a) for a in x):
        raise ConfigError(f"{path}{key}", "expected an array of three finite numbers")
    return [float(a) for a in x]


def _law(d):
    if d is None:
        return FixedSoundSpeed(1.0)
    if not isinstance(d, dict):
        raise ConfigError("background.law", "expected an object")
    kind = d.get("kind")
    if kind == "fixed_sound_speed":
        return FixedSoundSpeed(_number(d, "c", "background.law.", positive=True))
    if kind == "gamma_law":
        A = _number(d, "A", "background.law.", positive=True)
        gp = _number(d, "gamma_p", "background.law.")
        if gp < 1:
            raise ConfigError("background.law.gamma_p", f"must be >= 1, got {gp}")
        return GammaLaw(A, gp)
    raise ConfigError("background.law.kind", f"expected 'fixed_sound_speed' or 'gamma_law', got {kind!r}")


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    if "background" not in doc or not isinstance(doc["background"], dict):
        raise ConfigError("background", "missing or not an object")
    b = doc["background"]
    try:
        bg = PlanarBackground(rho=_number(b, "rho", "background.", positive=True),
                              vbar=_number(b, "vbar", "background.", nonneg=True),
                              F1=_row(b, "F1", "background."), F2=_row(b, "F2", "background."),
                              law=_law(b.get("law")))
    except DomainError as exc:
        raise ConfigError("background", str(exc)) from exc

    grid = dict(DEFAULT_GRID)
    g = doc.get("grid", {})
    if not isinstance(g, dict):
        raise ConfigError("grid", "expected an object")
    for key, lo in (("theta_points", 8), ("delta_points", 64)):
        if key in g:
            v = g[key]
            if isinstance(v, bool) or not isinstance(v, int) or v < lo:
                raise ConfigError(f"grid.{key}", f"expected an integer >= {lo}, got {v!r}")
            grid[key] = v
    if "gamma_levels" in g:
        lv = g["gamma_levels"]
        if not isinstance(lv, list) or not lv or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 for x in lv):
            raise ConfigError("grid.gamma_levels", "expected a nonempty list of positive numbers")
        grid["gamma_levels"] = [float(x) for x in lv]

    tol = dict(DEFAULT_TOLERANCES)
    t = doc.get("tolerances", {})
    if not isinstance(t, dict):
        raise ConfigError("tolerances", "expected an object")
    for key in t:
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{key}", "unknown tolerance")
        tol[key] = _number(t, key, "tolerances.", positive=True)

    sweep = None
    if doc.get("sweep") is not None:
        s = doc["sweep"]
        if not isinstance(s, dict):
            raise ConfigError("sweep", "expected an object")
        p = s.get("parameter")
        if p not in SWEEP_PARAMETERS:
            raise ConfigError("sweep.parameter", f"expected one of {SWEEP_PARAMETERS}, got {p!r}")
        start = _number(s, "from", "sweep.")
        stop = _number(s, "to", "sweep.")
        if not start < stop:
            raise ConfigError("sweep.to", "sweep.from must be smaller than sweep.to")
        steps = s.get("steps")
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
            raise ConfigError("sweep.steps", f"expected an integer >= 2, got {steps!r}")
        sweep = Sweep(p, start, stop, steps)

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed", f"expected an integer, got {seed!r}")
    oracle = doc.get("oracle", {})
    if not isinstance(oracle, dict):
        raise ConfigError("oracle", "expected an object")
    return RunConfig(bg, grid, tol, sweep, seed, dict(oracle))


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from exc
    return parse_config(doc)


def swept_background(bg: PlanarBackground, parameter: str, value: float) -> PlanarBackground:
    if parameter == "vbar":
        return bg.replace(vbar=value)
    if parameter == "f_scale":
        return bg.replace(F1=bg.F1 * value, F2=bg.F2 * value)
    if parameter == "c":
        return bg.replace(law=FixedSoundSpeed(value))
    raise ValueError(parameter)
