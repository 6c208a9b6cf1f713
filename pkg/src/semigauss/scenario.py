"""Declarative scenario configuration for the CLI runner.

The config format is flat ``key = value`` pairs with dotted section
prefixes, one per line, '#' comments allowed.  It is deliberately
trivial to parse and diff:

    model.name = harmonic
    model.omega = 2.0
    initial.p = 0.0
    initial.q = 1.0
    shape.re = 0.0
    shape.im = 1.0
    run.hbar = 0.1
    run.t_end = 62.8318530717958648
    run.dt_out = 0.0490873852123405
    analyses = propagate, floquet

Vector values (d >= 2) are whitespace-separated; shape.re / shape.im
hold d*d entries in row-major order.  Optional sections: tol.* for
tolerance overrides, floquet.* (period, k_max, n_max, tol_rat, eps),
oracle.* (n, half_width, dt, refine), scaling.* (hbars, t_probe),
sweep.* (key, values, workers), out.dir, seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ValidationError
from .models import HamiltonianModel, make_model
from .symplectic import PhaseSpacePoint, SiegelForm

ANALYSES = ("propagate", "floquet", "compare", "scaling")


def _parse_value(raw: str):
    raw = raw.strip()
    parts = raw.replace(",", " ").split()
    if not parts:
        return ""
    if len(parts) > 1:
        try:
            return [float(p) for p in parts]
        except ValueError:
            return parts
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def parse_config(path) -> dict:
    """Flat key/value file -> dict; later keys override earlier ones."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}",
                              module="cli", guard="config")
    entries: dict = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {line!r}",
                                  module="cli", guard="config")
        key, raw = line.split("=", 1)
        entries[key.strip()] = _parse_value(raw)
    return entries


def _as_floats(value, key) -> np.ndarray:
    if isinstance(value, (int, float)):
        return np.array([float(value)])
    try:
        return np.asarray([float(v) for v in value])
    except (TypeError, ValueError):
        raise ValidationError(f"'{key}' must be numeric", module="cli", guard="config")


@dataclass
class Scenario:
    """Validated scenario: model, initial data, run parameters, options."""

    model: HamiltonianModel
    X0: PhaseSpacePoint
    Z0: SiegelForm
    hbar: float
    t_end: float
    dt_out: float
    analyses: tuple
    out_dir: Optional[str] = None
    seed: Optional[int] = None
    tol: dict = field(default_factory=dict)
    floquet: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    scaling: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def build_scenario(entries: dict) -> Scenario:
    """Validate a parsed config dict into a Scenario."""
    entries = dict(entries)

    def take(key, default=None, required=False):
        if key in entries:
            return entries.pop(key)
        if required:
            raise ValidationError(f"config is missing required key '{key}'",
                                  module="cli", guard="config")
        return default

    name = take("model.name", required=True)
    params = {k.split(".", 1)[1]: entries.pop(k)
              for k in [k for k in entries if k.startswith("model.")]}
    model = make_model(str(name), **params)

    p = _as_floats(take("initial.p", required=True), "initial.p")
    q = _as_floats(take("initial.q", required=True), "initial.q")
    X0 = PhaseSpacePoint(p, q)
    if X0.d != model.d:
        raise ValidationError(
            f"initial point has d={X0.d} but model '{model.name}' has d={model.d}",
            module="cli", guard="config")

    d = model.d
    re = _as_floats(take("shape.re", [0.0] * (d * d)), "shape.re")
    im = _as_floats(take("shape.im", required=True), "shape.im")
    if re.size != d * d or im.size != d * d:
        raise ValidationError(
            f"shape.re / shape.im need {d * d} entries (row-major), "
            f"got {re.size} / {im.size}", module="cli", guard="config")
    Z0 = SiegelForm(re.reshape(d, d) + 1j * im.reshape(d, d))

    hbar = float(take("run.hbar", required=True))
    t_end = float(take("run.t_end", required=True))
    dt_out = float(take("run.dt_out", required=True))
    if hbar <= 0.0 or t_end <= 0.0 or dt_out <= 0.0:
        raise ValidationError("run.hbar, run.t_end, run.dt_out must all be positive",
                              module="cli", guard="config")

    analyses_raw = take("analyses", [])
    if isinstance(analyses_raw, str):
        analyses_raw = analyses_raw.split()
    elif isinstance(analyses_raw, (int, float)):
        raise ValidationError("'analyses' must name analyses", module="cli", guard="config")
    analyses = tuple(str(a) for a in analyses_raw)
    for a in analyses:
        if a not in ANALYSES:
            raise ValidationError(
                f"unknown analysis '{a}'; choose from {', '.join(ANALYSES)}",
                module="cli", guard="config")

    out_dir = take("out.dir")
    seed = take("seed")
    if seed is not None:
        seed = int(seed)

    def section(prefix):
        keys = [k for k in entries if k.startswith(prefix + ".")]
        return {k.split(".", 1)[1]: entries.pop(k) for k in keys}

    scenario = Scenario(model, X0, Z0, hbar, t_end, dt_out, analyses,
                        out_dir=str(out_dir) if out_dir else None, seed=seed,
                        tol=section("tol"), floquet=section("floquet"),
                        oracle=section("oracle"), scaling=section("scaling"),
                        sweep=section("sweep"))
    if entries:
        raise ValidationError(
            f"unrecognized config key(s): {', '.join(sorted(entries))}",
            module="cli", guard="config")

    if "hbars" in scenario.scaling:
        h = _as_floats(scenario.scaling["hbars"], "scaling.hbars")
        if np.any(h <= 0.0):
            raise ValidationError("scaling.hbars must be positive", module="cli",
                                  guard="config")
        scenario.scaling["hbars"] = h.tolist()
    if not math.isfinite(t_end * dt_out * hbar):
        raise ValidationError("non-finite run parameters", module="cli", guard="config")
    return scenario


def load_scenario(path) -> Scenario:
    return build_scenario(parse_config(path))
