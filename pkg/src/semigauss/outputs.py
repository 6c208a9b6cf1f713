"""Machine-readable report files for the scenario runner.

All floating-point CSV columns carry 17 significant digits so doubles
round-trip exactly; the JSON summaries hold only numbers, strings,
booleans, arrays, and null.  Each delimited file gets a rendered figure
next to it.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import plots

FLOAT_FMT = "%.17g"


def _write_csv(path: Path, header, columns):
    columns = [np.asarray(c) for c in columns]
    n = len(columns[0])
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(FLOAT_FMT % c[i] for c in columns))
    path.write_text("\n".join(lines) + "\n")


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON-serializable: {type(value)}")


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                               default=_json_default) + "\n")


def emit_trajectory(traj, out: Path):
    d = traj.d
    if d == 1:
        header = ["t", "p", "q", "W", "sympl_defect", "hs_norm_S"]
    else:
        header = (["t"] + [f"p{i + 1}" for i in range(d)]
                  + [f"q{i + 1}" for i in range(d)] + ["W", "sympl_defect", "hs_norm_S"])
    columns = ([traj.times] + [traj.X[:, i] for i in range(2 * d)]
               + [traj.W, traj.sympl_defect, traj.hs_norm_S()])
    _write_csv(out / "trajectory.csv", header, columns)
    plots.render_trajectory(traj, out / "trajectory.png")


def emit_width(widths, out: Path, K=None):
    header = ["t", "sigma", "dx2", "dp2", "trG", "hsS2", "dual_path_gap"]
    _write_csv(out / "width.csv", header,
               [widths.times, widths.sigma, widths.dx2, widths.dp2,
                widths.tr_g, widths.hs_s2, widths.dual_path_gap])
    plots.render_width(widths, out / "width.png", K=K)


def _finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


def emit_floquet(analysis, hbar, t_e, regime, out: Path):
    revival = analysis.revival
    payload = {
        "T": analysis.T,
        "detection": analysis.detection.kind,
        "detected_T": analysis.detection.T,
        "hessian_mismatch": analysis.detection.mismatch,
        "multipliers": [[float(m.real), float(m.imag)] for m in analysis.multipliers],
        "exponents": [[float(e.real), float(e.imag)] for e in analysis.exponents],
        "stability": analysis.stability,
        "nu": analysis.nu,
        "kappa": analysis.kappa,
        "K": _finite_or_none(analysis.K),
        "orthogonal_monodromy": analysis.orthogonal_monodromy,
        "n_R": None if revival is None else int(revival[0]),
        "T_R": None if revival is None else float(revival[1]),
        "recurrence_n": analysis.recurrence_n,
        "hbar": hbar,
        "ehrenfest_time": t_e,
        "ehrenfest_regime": regime,
        "pairing_defect": analysis.spectrum.pairing_defect,
    }
    if analysis.width_recurrence is not None:
        payload["width_recurrence_passed"] = analysis.width_recurrence.passed
        payload["width_recurrence_max_deviation"] = float(
            np.max(analysis.width_recurrence.deviations))
    _write_json(out / "floquet.json", payload)
    plots.render_floquet(analysis.multipliers, out / "floquet.png")


def emit_compare(times, fid, phase, norm_err, exact_w, sigma, delta, out: Path):
    header = ["t", "fidelity", "phase_mismatch", "norm_error",
              "exact_width", "sigma", "delta"]
    _write_csv(out / "compare.csv", header,
               [times, fid, phase, norm_err, exact_w, sigma, delta])
    plots.render_compare(times, fid, exact_w, sigma, delta, out / "compare.png")


def emit_scaling(study, out: Path):
    _write_csv(out / "scaling.csv", ["hbar", "norm_error"],
               [study.hbars, study.errors])
    plots.render_scaling(study.hbars, study.errors, study.slope, out / "scaling.png")


def write_summary(payload: dict, out: Path):
    _write_json(out / "summary.json", payload)


def write_failure(exc, out: Path):
    _write_json(out / "failure.json", {
        "module": getattr(exc, "module", "unknown"),
        "guard": getattr(exc, "guard", "unknown"),
        "message": str(exc),
        "exit_code": getattr(exc, "exit_code", 3),
    })
