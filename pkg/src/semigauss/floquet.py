"""Periodic-Hessian detection, monodromy spectra, width bounds, revivals.

When the Hessian evaluated along a trajectory is T-periodic, the
linearized flow has a Floquet structure: S_{kT} = M^{-1} e^{kT L} M.
Everything here grows out of that observation:

* detect the smallest Hessian period (which for symmetric librations is
  half the orbit period, and which exists for unbounded rotational motion
  in a periodic potential);
* compute the monodromy S_T by re-integration to the exact period;
* classify its multiplier spectrum as elliptic / parabolic / hyperbolic;
* bound the width over one period by the Grönwall constant K = e^kappa,
  kappa = 2 T sup_t ||J H''(X_t)||_HS;
* predict shape revivals at T_R = n_R T from rational dependences of the
  multiplier angles, and search the computed shape series for recurrences
  independently of that prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (AmbiguityError, CoverageError, ResolutionError,
                     ValidationError)
from .flow import IntegratorOptions, Trajectory, flow_map, integrate_flow
from .gaussian import PropagationResult, WidthSeries
from .models import HamiltonianModel
from .symplectic import SiegelForm, hs_norm, require_symplectic, symplectic_unity

__all__ = [
    "PeriodDetection", "FloquetSpectrum", "RecurrenceReport", "FloquetAnalysis",
    "detect_hessian_period", "monodromy", "floquet_spectrum", "gronwall_bound",
    "check_width_recurrence", "revival_predictor", "recurrence_search",
    "ehrenfest_time", "analyze",
]

STABILITY_TOL = 1e-7
LCM_CAP = 10 ** 6


@dataclass(frozen=True)
class PeriodDetection:
    """Outcome of the Hessian-period search."""

    kind: str                      # "periodic" | "constant" | "none"
    T: Optional[float]
    mismatch: float                # sup-norm Hessian mismatch at the result
    candidates: tuple = ()

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"


def _golden_minimize(f, lo: float, hi: float, xtol: float) -> float:
    """Golden-section minimum of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def detect_hessian_period(model: HamiltonianModel, traj: Trajectory,
                          tol: float = 1e-6,
                          options: Optional[IntegratorOptions] = None) -> PeriodDetection:
    """Smallest T with sup_t ||H''(X_{t+T}) - H''(X_t)||_HS below tol.

    The trajectory must span at least three candidate periods.  Grid
    candidates are local minima of the sampled mismatch, refined by
    golden-section minimization of the re-integrated mismatch function.
    Returns a constant-Hessian flag when the Hessian never moves (the
    harmonic case, where the recurrence statement degenerates), and
    "none" when no period below one third of the span qualifies.
    """
    hess = traj.hessians()
    n = len(traj)
    scale = max(1.0, float(np.max(np.linalg.norm(hess, axis=(1, 2)))))
    const_dev = float(np.max(np.linalg.norm(hess - hess[0], axis=(1, 2))))
    if const_dev < tol:
        return PeriodDetection("constant", None, const_dev)

    j_max = (n - 1) // 3
    if j_max < 5:
        raise CoverageError(
            "trajectory too short for period detection; need at least three "
            "candidate periods in the window", module="floquet", guard="window")
    grid_mismatch = np.array([
        float(np.max(np.linalg.norm(hess[j:] - hess[:n - j], axis=(1, 2))))
        for j in range(1, j_max + 1)])

    interior = np.arange(1, j_max - 1)
    is_min = ((grid_mismatch[interior] <= grid_mismatch[interior - 1]) &
              (grid_mismatch[interior] <= grid_mismatch[interior + 1]))
    candidate_js = (interior[is_min] + 1).tolist()
    if not candidate_js:
        return PeriodDetection("none", None, float(grid_mismatch.min()))

    dt = traj.dt_out
    span = traj.t_end
    X0 = traj.X[0]
    n_base = min(128, n // 2)

    def sup_mismatch(T: float) -> float:
        base_times = np.linspace(0.0, span - T, n_base)
        base = flow_map(model, X0, base_times, options)
        shifted = flow_map(model, X0, base_times + T, options)
        h_base = np.array([model.hess(x) for x in base])
        h_shift = np.array([model.hess(x) for x in shifted])
        return float(np.max(np.linalg.norm(h_shift - h_base, axis=(1, 2))))

    accepted = []
    for j in candidate_js[:8]:
        lo, hi = (j - 1) * dt, (j + 1) * dt
        T_ref = _golden_minimize(sup_mismatch, max(lo, 0.5 * dt), hi, xtol=1e-9 * max(1.0, hi))
        m_ref = sup_mismatch(T_ref)
        if m_ref < tol * scale:
            accepted.append((T_ref, m_ref))
        if len(accepted) >= 3:
            break

    if not accepted:
        return PeriodDetection("none", None, float(grid_mismatch.min()),
                               tuple((j * dt, float(grid_mismatch[j - 1])) for j in candidate_js[:8]))

    T_best, m_best = accepted[0]
    for T_other, m_other in accepted[1:]:
        ratio = T_other / T_best
        if abs(ratio - round(ratio)) > 0.01:
            raise AmbiguityError(
                "ambiguous near-periods below tolerance: "
                + ", ".join(f"T={T:.9g} (mismatch {m:.3e})" for T, m in accepted),
                module="floquet", guard="period-ambiguity")
    return PeriodDetection("periodic", T_best, m_best)


def monodromy(traj: Trajectory, T: float,
              options: Optional[IntegratorOptions] = None,
              allow_beyond: bool = False) -> np.ndarray:
    """Flow differential over one period, re-integrated to hit t = T exactly."""
    if T <= 0.0 or not np.isfinite(T):
        raise ValidationError(f"period must be positive and finite, got {T!r}",
                              module="floquet", guard="period")
    if T > traj.t_end * (1.0 + 1e-9) and not allow_beyond:
        raise ValidationError(
            f"period {T:g} lies beyond the trajectory span {traj.t_end:g} "
            "and re-integration beyond it is disabled",
            module="floquet", guard="period")
    one = integrate_flow(traj.model, traj.X[0], t_end=T, dt_out=T, options=options)
    return one.S[-1]


@dataclass(frozen=True)
class FloquetSpectrum:
    """Multiplier spectrum of a monodromy matrix and its classification."""

    T: float
    multipliers: np.ndarray
    exponents: np.ndarray          # log(mu)/T, principal branch (mod 2 pi i / T)
    stability: str                 # "elliptic" | "parabolic" | "hyperbolic"
    nu: float                      # max real part of the exponents
    orthogonal_monodromy: bool
    pairing_defect: float
    eigvec_cond: float

    def __post_init__(self):
        for name in ("multipliers", "exponents"):
            arr = np.asarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


# Multipliers closer than this are treated as one cluster.  A defective
# pair known to matrix accuracy eps splits like sqrt(eps * coupling), so
# the band must sit well above sqrt(1e-10).
CLUSTER_TOL = 1e-4


def floquet_spectrum(M, T: float, tol_stab: float = STABILITY_TOL,
                     sympl_tol: float = 1e-7) -> FloquetSpectrum:
    """Classify a symplectic monodromy matrix.

    Hyperbolic when some multiplier modulus deviates from 1 beyond
    tol_stab, parabolic when a repeated multiplier is defective, elliptic
    otherwise.  Eigenvalues of a near-defective matrix split like the
    square root of the matrix error, so repeated multipliers are first
    grouped into clusters and defectiveness is decided by the numerical
    rank of M - mu I (threshold 1e-6 ||M||); only multipliers outside any
    cluster are judged radially.  Hyperbolicity weaker than the rank
    resolution of a defective pair cannot be certified from a single
    monodromy matrix and classifies as parabolic.
    """
    M = require_symplectic(M, sympl_tol)
    mult, V = np.linalg.eig(M)
    mult = mult.astype(complex)      # eig returns real dtype for real spectra
    exponents = np.log(mult) / T
    # pairing mu <-> 1/mu, measured relative to the partner's magnitude
    # (reciprocals of far-off-circle multipliers amplify absolute error)
    recip = 1.0 / mult
    gaps = np.min(np.abs(mult[:, None] - recip[None, :]), axis=0)
    pairing_defect = float(np.max(gaps / np.maximum(1.0, np.abs(recip))))
    eigvec_cond = float(np.linalg.cond(V))

    rank_tol = 1e-6 * hs_norm(M)
    hyperbolic = False
    parabolic = False
    unassigned = list(range(len(mult)))
    while unassigned:
        i = unassigned.pop(0)
        cluster = [i] + [j for j in unassigned if abs(mult[j] - mult[i]) < CLUSTER_TOL]
        unassigned = [j for j in unassigned if j not in cluster]
        mu = complex(np.mean(mult[cluster]))
        if len(cluster) == 1:
            if abs(abs(mu) - 1.0) > tol_stab:
                hyperbolic = True
            continue
        rank = np.linalg.matrix_rank(M - mu * np.eye(M.shape[0]), tol=rank_tol)
        geometric = M.shape[0] - rank
        if geometric < len(cluster):
            parabolic = True
        elif abs(abs(mu) - 1.0) > tol_stab:
            hyperbolic = True
    stability = "hyperbolic" if hyperbolic else ("parabolic" if parabolic else "elliptic")

    if stability == "hyperbolic":
        nu = float(np.max(exponents.real))
    else:
        # certified non-hyperbolic: residual real parts are eigenvalue noise
        nu = 0.0
    orthogonal = hs_norm(M.T @ M - np.eye(M.shape[0])) < 1e-8
    return FloquetSpectrum(float(T), mult, exponents, stability, nu,
                           bool(orthogonal), pairing_defect, eigvec_cond)


def gronwall_bound(model: HamiltonianModel, traj: Trajectory, T: float,
                   options: Optional[IntegratorOptions] = None):
    """(kappa, K) with kappa = 2 T sup_{[0,T]} ||J H''(X_t)||_HS, K = e^kappa.

    The sup is taken over the dense sample grid and refined by local
    golden-section search around the grid maximizer.
    """
    mask = traj.times <= T * (1.0 + 1e-9)
    idx = np.nonzero(mask)[0]
    if idx.size < 50:
        raise ResolutionError(
            f"only {idx.size} samples in [0, T]; at least 50 required",
            module="floquet", guard="resolution")
    J = symplectic_unity(model.d)

    norms = np.array([hs_norm(J @ model.hess(traj.X[k])) for k in idx])
    k_star = int(np.argmax(norms))
    sup = float(norms[k_star])

    lo = traj.times[idx[max(k_star - 1, 0)]]
    hi = traj.times[idx[min(k_star + 1, idx.size - 1)]]
    if hi > lo:
        X0 = traj.X[0]

        def neg_norm(t: float) -> float:
            if t <= 0.0:
                x = X0
            else:
                x = flow_map(model, X0, np.array([t]), options)[0]
            return -hs_norm(J @ model.hess(x))

        t_ref = _golden_minimize(neg_norm, float(lo), float(hi), xtol=1e-8 * max(1.0, T))
        sup = max(sup, -neg_norm(t_ref))

    kappa = 2.0 * T * sup
    with np.errstate(over="ignore"):
        K = float(np.exp(kappa))
    return kappa, K


@dataclass(frozen=True)
class RecurrenceReport:
    """Relative width deviations |sigma_{kT} - sigma_0| / sigma_0."""

    ks: np.ndarray
    deviations: np.ndarray
    tol: float
    passed: bool

    def __post_init__(self):
        for name in ("ks", "deviations"):
            arr = np.asarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def check_width_recurrence(widths: WidthSeries, T: float, k_max: int,
                           tol_rec: float = 1e-7) -> RecurrenceReport:
    """Width deviation at each multiple of T available in the series.

    Multiples of T must land on the sampling grid (to rounding); the
    series must cover k_max periods.
    """
    times = widths.times
    if len(times) < 2:
        raise CoverageError("width series too short", module="floquet", guard="coverage")
    dt = float(times[1] - times[0])
    if k_max * T > times[-1] * (1.0 + 1e-9):
        raise CoverageError(
            f"width series ends at t={times[-1]:g}, cannot reach k_max*T={k_max * T:g}",
            module="floquet", guard="coverage")
    sigma0 = float(widths.sigma[0])
    ks = np.arange(1, k_max + 1)
    deviations = np.empty(k_max)
    for i, k in enumerate(ks):
        target = k * T
        j = int(round(target / dt))
        if j >= len(times) or abs(times[j] - target) > 1e-9 * max(1.0, target):
            raise CoverageError(
                f"t = {k}T = {target:g} does not land on the sampling grid",
                module="floquet", guard="grid-alignment")
        deviations[i] = abs(widths.sigma[j] - sigma0) / sigma0
    return RecurrenceReport(ks, deviations, tol_rec, bool(np.all(deviations < tol_rec)))


def revival_predictor(spectrum: FloquetSpectrum, tol_rat: float = 1e-6,
                      n_max: int = 1000, lcm_cap: int = LCM_CAP) -> Optional[tuple]:
    """Predict a shape revival time T_R = n_R T from the multiplier angles.

    Writes each multiplier as e^(2 pi i theta); continued-fraction
    approximations with denominators <= n_max propose n_R as the lcm of
    the denominators, accepted only when every n_R * theta_i is within
    tol_rat of an integer (so the orthogonal part actually closes up at
    n_R periods).  Returns None for rationally independent angles
    (quasi-periodic case) and when the lcm exceeds the practicality cap.
    """
    if spectrum.stability != "elliptic":
        raise ValidationError(
            f"revival prediction requires purely imaginary exponents; "
            f"spectrum is {spectrum.stability}", module="floquet", guard="stability")
    thetas = np.mod(np.angle(spectrum.multipliers) / (2.0 * np.pi), 1.0)
    denominators = []
    for theta in thetas:
        frac = Fraction(float(theta)).limit_denominator(n_max)
        denominators.append(frac.denominator)
    n_r = math.lcm(*denominators) if denominators else 1
    if n_r > lcm_cap:
        return None
    closure = np.abs(n_r * thetas - np.round(n_r * thetas))
    if np.max(closure) >= tol_rat:
        return None
    return n_r, n_r * spectrum.T


def recurrence_search(shapes: Sequence, eps: float, n_max: int) -> Optional[int]:
    """Smallest n <= n_max with ||Z_{nT} - Z_0||_HS < eps, from a stored series.

    `shapes` holds the shape at consecutive multiples of T starting at 0.
    This is a direct search over computed values, independent of
    revival_predictor, and serves as its empirical check.
    """
    if len(shapes) < n_max + 1:
        raise CoverageError(
            f"shape series has {len(shapes)} entries; need n_max + 1 = {n_max + 1}",
            module="floquet", guard="coverage")

    def as_matrix(z):
        return z.Z if isinstance(z, SiegelForm) else np.asarray(z)

    Z0 = as_matrix(shapes[0])
    for n in range(1, n_max + 1):
        if np.linalg.norm(as_matrix(shapes[n]) - Z0) < eps:
            return n
    return None


def ehrenfest_time(hbar: float, analysis) -> tuple:
    """Validity horizon of the semiclassical approximation, with regime label.

    Unstable motion (nu > 0): T_E = |ln hbar| / (6 nu), logarithmic in hbar.
    Stable motion (nu = 0): T_E = hbar^(-1/2), algebraic in hbar.  The
    proportionality constants are fixed to 1 by convention.
    """
    if not (0.0 < hbar < 1.0):
        raise ValidationError(f"hbar must lie in (0, 1), got {hbar!r}",
                              module="floquet", guard="parameter")
    nu = float(getattr(analysis, "nu", analysis))
    if nu > STABILITY_TOL:
        return abs(math.log(hbar)) / (6.0 * nu), "logarithmic"
    return hbar ** -0.5, "algebraic"


@dataclass(frozen=True)
class FloquetAnalysis:
    """Assembled stability picture of one scenario."""

    T: float
    detection: PeriodDetection
    M: np.ndarray
    spectrum: FloquetSpectrum
    kappa: float
    K: float
    revival: Optional[tuple]            # (n_R, T_R) or None
    recurrence_n: Optional[int]
    width_recurrence: Optional[RecurrenceReport]

    @property
    def multipliers(self) -> np.ndarray:
        return self.spectrum.multipliers

    @property
    def exponents(self) -> np.ndarray:
        return self.spectrum.exponents

    @property
    def stability(self) -> str:
        return self.spectrum.stability

    @property
    def nu(self) -> float:
        return self.spectrum.nu

    @property
    def orthogonal_monodromy(self) -> bool:
        return self.spectrum.orthogonal_monodromy


def _aligned_period_stride(times: np.ndarray, T: float) -> Optional[int]:
    if len(times) < 2:
        return None
    dt = float(times[1] - times[0])
    stride = int(round(T / dt))
    if stride < 1 or abs(stride * dt - T) > 1e-9 * max(1.0, T):
        return None
    return stride


def analyze(model: HamiltonianModel, traj: Trajectory,
            propagation: Optional[PropagationResult] = None, *,
            period: Optional[float] = None,
            detect_tol: float = 1e-6,
            tol_stab: float = STABILITY_TOL,
            k_max: int = 10,
            revival_tol: float = 1e-6,
            revival_n_max: int = 1000,
            recurrence_eps: float = 1e-8,
            options: Optional[IntegratorOptions] = None) -> FloquetAnalysis:
    """Run the full stability pipeline for one trajectory.

    Detects the Hessian period (or takes a user-supplied one, mandatory
    for constant-Hessian flows), computes monodromy, spectrum, and the
    one-period width bound, then width recurrence, revival prediction,
    and the empirical shape-recurrence search where the propagation
    results make them possible.
    """
    detection = detect_hessian_period(model, traj, detect_tol, options)
    if period is not None:
        T = float(period)
    elif detection.kind == "periodic":
        T = detection.T
    elif detection.kind == "constant":
        raise ValidationError(
            "the Hessian is constant along this flow, so there is no period "
            "to detect; supply an explicit period for the Floquet stage",
            module="floquet", guard="constant-hessian")
    else:
        raise ValidationError(
            "no Hessian period found below a third of the trajectory span; "
            "supply an explicit period or extend the trajectory",
            module="floquet", guard="no-period")

    M = monodromy(traj, T, options, allow_beyond=True)
    spectrum = floquet_spectrum(M, T, tol_stab)

    base = traj
    if np.count_nonzero(traj.times <= T * (1.0 + 1e-9)) < 50:
        base = integrate_flow(model, traj.X[0], t_end=T, dt_out=T / 256.0, options=options)
    kappa, K = gronwall_bound(model, base, T, options)

    width_recurrence = None
    recurrence_n = None
    if propagation is not None:
        stride = _aligned_period_stride(propagation.times, T)
        if stride is not None:
            k_avail = (len(propagation.times) - 1) // stride
            if k_avail >= 1:
                width_recurrence = check_width_recurrence(
                    propagation.widths, T, min(k_max, k_avail))
                shapes = [propagation.states[i * stride].shape for i in range(k_avail + 1)]
                recurrence_n = recurrence_search(shapes, recurrence_eps, k_avail)

    revival = None
    if spectrum.stability == "elliptic":
        revival = revival_predictor(spectrum, revival_tol, revival_n_max)

    return FloquetAnalysis(T, detection, M, spectrum, kappa, K,
                           revival, recurrence_n, width_recurrence)
