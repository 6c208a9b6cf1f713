"""Joint integration of Hamilton's equations, the linearized flow, and the action.

The augmented system solved here is

    Xdot = J H'(X),      (trajectory)
    Sdot = J H''(X) S,   (flow differential, S_0 = identity)
    Wdot = p . dH/dp - H (classical action integrand p^T qdot - H)

integrated with an adaptive high-order Runge-Kutta scheme (DOP853).  Output
samples are exact integration endpoints: the solver is driven segment by
segment so no dense-output interpolation enters the stored samples.  The
symplectic defect of S is recorded per sample and never projected away;
masking integrator trouble would defeat the downstream stability analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import DOP853

from .errors import StepUnderflowError, TrajectoryEscapeError, ValidationError
from .models import HamiltonianModel
from .symplectic import PhaseSpacePoint, hs_norm, symplectic_unity

__all__ = [
    "IntegratorOptions", "FlowSample", "Trajectory",
    "integrate_flow", "flow_map", "lyapunov_estimate", "hs_norm",
]


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = np.inf


@dataclass(frozen=True)
class FlowSample:
    """One time slice of the augmented integration."""

    t: float
    X: PhaseSpacePoint
    S: np.ndarray
    W: float
    sympl_defect: float


class Trajectory:
    """Uniformly sampled solution bundle (t_k, X_k, S_k, W_k).

    Arrays are read-only; a trajectory is safe to share between threads.
    """

    def __init__(self, model: HamiltonianModel, times, X, S, W, defects, stats):
        self.model = model
        self.times = np.asarray(times, dtype=float)
        self.X = np.asarray(X, dtype=float)
        self.S = np.asarray(S, dtype=float)
        self.W = np.asarray(W, dtype=float)
        self.sympl_defect = np.asarray(defects, dtype=float)
        self.stats = dict(stats)
        for arr in (self.times, self.X, self.S, self.W, self.sympl_defect):
            arr.flags.writeable = False

    @property
    def d(self) -> int:
        return self.model.d

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def dt_out(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def __len__(self) -> int:
        return len(self.times)

    def sample(self, k: int) -> FlowSample:
        return FlowSample(float(self.times[k]),
                          PhaseSpacePoint.from_vector(self.X[k]),
                          self.S[k], float(self.W[k]),
                          float(self.sympl_defect[k]))

    def energies(self) -> np.ndarray:
        """H(X_k) along the trajectory (conserved for these symbols)."""
        return np.array([self.model.value(x) for x in self.X])

    def hessians(self) -> np.ndarray:
        """H''(X_k) along the trajectory, shape (n, 2d, 2d)."""
        return np.array([self.model.hess(x) for x in self.X])

    def hs_norm_S(self) -> np.ndarray:
        return np.linalg.norm(self.S, axis=(1, 2))


def _augmented_rhs(model: HamiltonianModel):
    d = model.d
    n_s = 4 * d * d

    def rhs(t, y):
        X = y[:2 * d]
        S = y[2 * d:2 * d + n_s].reshape(2 * d, 2 * d)
        grad = model.grad(X)
        M = model.hess(X) @ S
        dy = np.empty_like(y)
        dy[:d] = -grad[d:]
        dy[d:2 * d] = grad[:d]
        dy[2 * d:2 * d + n_s] = np.concatenate([-M[d:], M[:d]]).ravel()
        dy[-1] = X[:d] @ grad[:d] - model.value(X)
        return dy

    return rhs


def _xonly_rhs(model: HamiltonianModel):
    d = model.d

    def rhs(t, y):
        grad = model.grad(y)
        return np.concatenate([-grad[d:], grad[:d]])

    return rhs


def _step_segments(rhs, y0, times, options: IntegratorOptions):
    """Drive DOP853 so every output time is an exact integration endpoint.

    Yields the state at each time in `times[1:]`; raises the numerical
    guards with a `partial` attribute carrying the rows produced so far.
    """
    y = np.asarray(y0, dtype=float)
    rows = [y.copy()]
    h_prev: Optional[float] = None
    nfev = 0
    accepted = 0
    for k in range(len(times) - 1):
        t0, t1 = float(times[k]), float(times[k + 1])
        first = min(h_prev, t1 - t0) if h_prev else None
        solver = DOP853(rhs, t0, y, t1, rtol=options.rtol, atol=options.atol,
                        max_step=options.max_step, first_step=first)
        # errstate: blowing-up dynamics overflow inside trial steps; the
        # guards below turn that into a typed abort instead of warnings.
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            while solver.status == "running":
                solver.step()
                accepted += 1
        nfev += solver.nfev
        if solver.status == "failed":
            exc_cls = (TrajectoryEscapeError if not np.all(np.isfinite(solver.y))
                       else StepUnderflowError)
            exc = exc_cls(
                f"integration failed at t={solver.t:.6g} "
                f"({'non-finite state' if exc_cls is TrajectoryEscapeError else 'step size underflow'})",
                module="flow", guard="integration")
            exc.partial = (np.array(rows), nfev, accepted, k)
            raise exc
        y = solver.y
        if not np.all(np.isfinite(y)):
            exc = TrajectoryEscapeError(
                f"state became non-finite at t={t1:.6g}", module="flow", guard="escape")
            exc.partial = (np.array(rows), nfev, accepted, k)
            raise exc
        h_prev = abs(solver.h_previous) if solver.h_previous else None
        rows.append(y.copy())
    # DOP853 spends 12 evaluations per attempted step plus one on entry.
    attempts = max(accepted, (nfev - (len(times) - 1)) // 12)
    stats = {"steps": accepted, "rejected": attempts - accepted, "nfev": nfev}
    return np.array(rows), stats


def _output_grid(t_end: float, dt_out: float) -> np.ndarray:
    if dt_out <= 0.0:
        raise ValidationError("output spacing must be positive",
                              module="flow", guard="grid")
    if t_end < dt_out:
        raise ValidationError(
            f"t_end={t_end:g} shorter than output spacing {dt_out:g}",
            module="flow", guard="grid")
    n = int(np.floor(t_end / dt_out * (1.0 + 1e-12)))
    return np.arange(n + 1) * dt_out


def integrate_flow(model: HamiltonianModel, X0, t_end: float, dt_out: float,
                   options: Optional[IntegratorOptions] = None) -> Trajectory:
    """Integrate trajectory, flow differential, and action on a uniform grid.

    Parameters
    ----------
    model : HamiltonianModel
    X0 : PhaseSpacePoint or array of length 2d
    t_end : float
        Final time; rounded down to the nearest grid multiple of dt_out.
    dt_out : float
        Output spacing; every sample is an exact integration endpoint.
    options : IntegratorOptions, optional

    Raises the trajectory-escape / step-underflow guards with the partial
    trajectory attached as ``exc.trajectory``.
    """
    options = options or IntegratorOptions()
    X0 = X0 if isinstance(X0, PhaseSpacePoint) else PhaseSpacePoint.from_vector(X0)
    if X0.d != model.d:
        raise ValidationError(
            f"initial point has d={X0.d}, model '{model.name}' has d={model.d}",
            module="flow", guard="dimension")
    times = _output_grid(t_end, dt_out)
    d = model.d
    y0 = np.concatenate([X0.vector, np.eye(2 * d).ravel(), [0.0]])
    rhs = _augmented_rhs(model)

    def build(rows, stats, t_slice):
        X = rows[:, :2 * d]
        S = rows[:, 2 * d:2 * d + 4 * d * d].reshape(-1, 2 * d, 2 * d)
        W = rows[:, -1]
        J = symplectic_unity(d)
        defects = np.array([hs_norm(s.T @ J @ s - J) for s in S])
        stats = {**stats, "rtol": options.rtol, "atol": options.atol}
        return Trajectory(model, t_slice, X, S, W, defects, stats)

    try:
        rows, stats = _step_segments(rhs, y0, times, options)
    except (TrajectoryEscapeError, StepUnderflowError) as exc:
        rows, nfev, accepted, k = exc.partial
        exc.trajectory = build(rows, {"steps": accepted, "rejected": 0, "nfev": nfev},
                               times[:k + 1])
        raise
    return build(rows, stats, times)


def flow_map(model: HamiltonianModel, X0, times,
             options: Optional[IntegratorOptions] = None) -> np.ndarray:
    """Phase-space points of the flow at the given sorted times (X only).

    Cheaper than integrate_flow when the flow differential is not needed,
    e.g. for period refinement.  times[0] may be > 0; integration always
    starts from t = 0 at X0.
    """
    options = options or IntegratorOptions()
    X0 = X0 if isinstance(X0, PhaseSpacePoint) else PhaseSpacePoint.from_vector(X0)
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return np.empty((0, 2 * model.d))
    if np.any(np.diff(times) <= 0.0) or times[0] < 0.0:
        raise ValidationError("times must be strictly increasing and nonnegative",
                              module="flow", guard="grid")
    grid = times if times[0] == 0.0 else np.concatenate([[0.0], times])
    rows, _ = _step_segments(_xonly_rhs(model), X0.vector, grid, options)
    return rows if times[0] == 0.0 else rows[1:]


@dataclass(frozen=True)
class LyapunovEstimate:
    gamma: float
    times: np.ndarray = field(repr=False)
    series: np.ndarray = field(repr=False)


def lyapunov_estimate(traj: Trajectory) -> LyapunovEstimate:
    """Largest-singular-value growth rate ln s_max(t) / t of the flow differential.

    Returns the value at the final time together with the full convergence
    series, so callers can judge whether the trend has stabilized (it decays
    like ln(t)/t for shear-dominated flows).
    """
    if len(traj) < 10:
        raise ValidationError(
            f"trajectory has {len(traj)} samples; at least 10 required",
            module="flow", guard="insufficient-data")
    s_max = np.linalg.svd(traj.S[1:], compute_uv=False)[:, 0]
    times = traj.times[1:]
    series = np.log(s_max) / times
    return LyapunovEstimate(float(series[-1]), times, series)
