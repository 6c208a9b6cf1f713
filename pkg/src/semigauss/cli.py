"""Scenario runner: one config in, delimited series + figures out.

Subcommands select the analysis (propagate, floquet, compare, scaling,
sweep); the config may request further analyses, and dependencies run in
order flow -> gaussian -> floquet -> oracle comparison.  Exit codes:
0 success, 2 validation failure, 3 numerical-guard failure (partial
outputs plus failure.json naming the module and guard that fired).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from . import outputs
from .errors import NumericalGuardError, SemigaussError, ValidationError
from .flow import integrate_flow
from .floquet import analyze, ehrenfest_time
from .gaussian import propagate_gaussian, width_observable_error
from .oracle import (GridSpec, exact_width, fidelity, from_gaussian,
                     max_split_step, plan_grid, split_step_evolve)
from .scenario import Scenario, build_scenario, load_scenario, parse_config

__all__ = ["run_scenario", "main"]


def _run_compare(scenario: Scenario, traj, prop, out: Path):
    model = scenario.model
    if model.d != 1 or model.potential is None:
        raise ValidationError(
            f"oracle comparison needs a one-dimensional split-form model; "
            f"'{model.name}' does not qualify", module="cli", guard="compare")
    opts = scenario.oracle
    if "n" in opts and "half_width" in opts:
        n = int(opts["n"])
        hw = float(opts["half_width"])
        center = float(scenario.X0.q[0])
        spec = GridSpec(center - hw, 2 * hw / n, n)
    else:
        spec = plan_grid(traj, prop.widths, scenario.hbar)
    psi0 = from_gaussian(prop.states[0], spec)
    dt = opts.get("dt")
    if dt is None:
        dt = max_split_step(model, psi0) / float(opts.get("refine", 4))
    evolution = split_step_evolve(model, psi0, traj.t_end, traj.dt_out, dt=float(dt))

    fids, phases, norm_errs = [], [], []
    for k in range(len(evolution.times)):
        res = fidelity(evolution.states[k], prop.states[k])
        fids.append(res.modulus)
        phases.append(res.phase_mismatch)
        norm_errs.append(res.norm_error)
    delta = width_observable_error(prop.widths, evolution)
    outputs.emit_compare(evolution.times, fids, phases, norm_errs,
                         evolution.widths, prop.widths.sigma, delta, out)
    return {"min_fidelity": float(min(fids)),
            "max_abs_delta": float(np.max(np.abs(delta))),
            "oracle_dt": evolution.dt,
            "oracle_n": psi0.n}


def _run_scaling(scenario: Scenario, out: Path):
    from .oracle import hbar_scaling_study
    opts = scenario.scaling
    if "hbars" not in opts or "t_probe" not in opts:
        raise ValidationError(
            "scaling analysis needs scaling.hbars and scaling.t_probe",
            module="cli", guard="config")
    study = hbar_scaling_study(scenario.model, scenario.X0, scenario.Z0,
                               [float(h) for h in opts["hbars"]],
                               float(opts["t_probe"]),
                               dt_refine=int(opts.get("refine", 8)))
    outputs.emit_scaling(study, out)
    return {"slope": study.slope if np.isfinite(study.slope) else None,
            "residual": study.residual,
            "exact_regime": study.exact_regime}


def run_scenario(config, out_dir=None, extra_analyses=(), quiet=True) -> int:
    """Execute a scenario config; returns the process exit code.

    `config` is a path or an already-built Scenario.  Artifacts land in
    `out_dir` (default: scenario's out.dir, else ./semigauss-out).
    """
    def say(msg):
        if not quiet:
            print(msg)

    try:
        scenario = config if isinstance(config, Scenario) else load_scenario(config)
    except SemigaussError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code

    out = Path(out_dir or scenario.out_dir or "semigauss-out")
    out.mkdir(parents=True, exist_ok=True)
    analyses = set(scenario.analyses) | set(extra_analyses)
    summary = {
        "model": scenario.model.name,
        "params": dict(scenario.model.params),
        "hbar": scenario.hbar,
        "t_end": scenario.t_end,
        "dt_out": scenario.dt_out,
        "analyses": sorted(analyses),
        "seed": scenario.seed,
        "exit_code": 0,
    }

    try:
        needs_prop = bool(analyses & {"propagate", "floquet", "compare"})
        say(f"integrating {scenario.model.name} flow to t={scenario.t_end:g}")
        try:
            traj = integrate_flow(scenario.model, scenario.X0,
                                  scenario.t_end, scenario.dt_out)
        except NumericalGuardError as exc:
            if hasattr(exc, "trajectory") and len(exc.trajectory) > 1:
                outputs.emit_trajectory(exc.trajectory, out)
            raise
        outputs.emit_trajectory(traj, out)
        summary["final_sympl_defect"] = float(traj.sympl_defect[-1])

        prop = None
        if needs_prop:
            say("propagating Gaussian shape and width")
            prop = propagate_gaussian(traj, scenario.Z0, scenario.hbar)

        analysis = None
        if "floquet" in analyses:
            say("running Floquet analysis")
            fl = scenario.floquet
            analysis = analyze(
                scenario.model, traj, prop,
                period=fl.get("period"),
                detect_tol=float(scenario.tol.get("detect", 1e-6)),
                tol_stab=float(scenario.tol.get("stab", 1e-7)),
                k_max=int(fl.get("k_max", 10)),
                revival_tol=float(fl.get("tol_rat", 1e-6)),
                revival_n_max=int(fl.get("n_max", 1000)),
                recurrence_eps=float(fl.get("eps", 1e-8)))
            t_e, regime = ehrenfest_time(scenario.hbar, analysis.nu) \
                if 0.0 < scenario.hbar < 1.0 else (None, "undefined")
            outputs.emit_floquet(analysis, scenario.hbar, t_e, regime, out)
            summary["stability"] = analysis.stability
            summary["T"] = analysis.T

        if prop is not None:
            outputs.emit_width(prop.widths, out,
                               K=None if analysis is None else analysis.K)
            summary["max_dual_path_gap"] = float(np.max(prop.widths.dual_path_gap))

        if "compare" in analyses:
            say("running grid-solver comparison")
            summary["compare"] = _run_compare(scenario, traj, prop, out)

        if "scaling" in analyses:
            say("running hbar scaling study")
            summary["scaling"] = _run_scaling(scenario, out)

    except SemigaussError as exc:
        print(f"error: {exc}", file=sys.stderr)
        summary["exit_code"] = exc.exit_code
        summary["error"] = str(exc)
        outputs.write_failure(exc, out)
        outputs.write_summary(summary, out)
        return exc.exit_code

    outputs.write_summary(summary, out)
    say(f"artifacts written to {out}")
    return 0


def _sweep_worker(args):
    entries, out_dir, extra, quiet = args
    try:
        scenario = build_scenario(entries)
    except SemigaussError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return run_scenario(scenario, out_dir, extra, quiet)


def _run_sweep(config_path, out_dir, quiet) -> int:
    entries = parse_config(config_path)
    key = entries.pop("sweep.key", None)
    values = entries.pop("sweep.values", None)
    workers = int(entries.pop("sweep.workers", 2))
    if key is None or values is None:
        print("error: [cli:config] sweep needs sweep.key and sweep.values",
              file=sys.stderr)
        return 2
    if not isinstance(values, list):
        values = [values]
    extra = tuple(entries.get("analyses", "propagate").split()
                  if isinstance(entries.get("analyses"), str) else ())
    base_out = Path(out_dir or entries.get("out.dir") or "semigauss-out")

    jobs = []
    for value in values:
        sub = dict(entries)
        sub[str(key)] = value
        label = f"{key}={value}".replace("/", "_").replace(" ", "_")
        jobs.append((sub, str(base_out / label), extra, quiet))

    codes = []
    if workers <= 1 or len(jobs) == 1:
        codes = [_sweep_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            codes = list(pool.map(_sweep_worker, jobs))
    return max(codes) if codes else 0


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="semigauss",
        description="Semiclassical Gaussian wave-packet propagation and analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in [
            ("propagate", "integrate the flow and the Gaussian width series"),
            ("floquet", "periodic-Hessian stability and revival analysis"),
            ("compare", "validate against the grid Schrödinger solver"),
            ("scaling", "fit the hbar exponent of the oracle error"),
            ("sweep", "fan a scenario out over sweep.values")]:
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="scenario config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="seed recorded in the summary (reserved for sweeps)")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)

    if args.command == "sweep":
        return _run_sweep(args.config, args.out, args.quiet)

    try:
        scenario = load_scenario(args.config)
    except SemigaussError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.seed is not None:
        scenario.seed = args.seed
    return run_scenario(scenario, args.out, extra_analyses=(args.command,),
                        quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
