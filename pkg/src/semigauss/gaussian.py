"""Semiclassical evolution of squeezed Gaussian states.

Along a classical trajectory the wave-packet shape moves by the
fractional-linear action of the flow differential, Z_t = S_t[Z_0], and
the phase-space covariance form moves by congruence transport,
G_t = (S_t^-1)^T G_0 S_t^-1.  Both routes are evaluated for every sample
and their discrepancy is exported; it is the cheapest end-to-end
consistency monitor this structure offers, so it is always on.

The accumulated prefactor combines the dynamical phase exp(i W(t)/hbar)
with the normalization branch det(C_t Z_0 + D_t)^(-1/2) tracked
continuously in t (branch chosen so it starts at +1).  Which branch of
the square root applies is a topological datum; tracking it continuously
replaces any explicit integer-index bookkeeping and is directly testable
against the grid Schrödinger solver for quadratic symbols.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CoverageError, ResolutionError, ValidationError
from .flow import Trajectory
from .symplectic import (PhaseSpacePoint, SiegelForm, WignerForm,
                         mobius_transform_batch, wigner_form_from_siegel)

__all__ = [
    "GaussianState", "WidthSeries", "PropagationResult",
    "propagate_gaussian", "evaluate_wavefunction", "wigner_function",
    "width_observable_error",
]

PHASE_UNIT_TOL = 1e-10


@dataclass(frozen=True)
class GaussianState:
    """Squeezed Gaussian: semiclassical parameter, center, shape, prefactor."""

    hbar: float
    center: PhaseSpacePoint
    shape: SiegelForm
    phase: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not (self.hbar > 0.0 and np.isfinite(self.hbar)):
            raise ValidationError(f"hbar must be positive and finite, got {self.hbar!r}",
                                  module="gaussian", guard="parameter")
        if self.center.d != self.shape.d:
            raise ValidationError(
                f"center dimension {self.center.d} != shape dimension {self.shape.d}",
                module="gaussian", guard="dimension")
        if abs(abs(self.phase) - 1.0) > PHASE_UNIT_TOL:
            raise ValidationError(
                f"|phase| = {abs(self.phase):.12f} deviates from 1 beyond {PHASE_UNIT_TOL:g}",
                module="gaussian", guard="unit-phase")

    @property
    def d(self) -> int:
        return self.center.d


@dataclass(frozen=True)
class WidthSeries:
    """Total width sigma_t = (hbar/2) tr G_t and its ingredients."""

    hbar: float
    times: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    dx2: np.ndarray = field(repr=False)
    dp2: np.ndarray = field(repr=False)
    tr_g: np.ndarray = field(repr=False)
    hs_s2: np.ndarray = field(repr=False)
    dual_path_gap: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("times", "sigma", "dx2", "dp2", "tr_g", "hs_s2", "dual_path_gap"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class PropagationResult:
    times: np.ndarray
    states: Sequence[GaussianState]
    widths: WidthSeries
    # Continuously tracked arg det(C_t Z_0 + D_t); the prefactor branch.
    argdet: np.ndarray


def propagate_gaussian(traj: Trajectory, Z0: SiegelForm, hbar: float) -> PropagationResult:
    """Evolve shape, width, and prefactor of a Gaussian along a trajectory.

    The shape moves by the fractional-linear action of S_t; the covariance
    form is additionally transported by congruence and the HS-norm gap
    between the two routes is recorded per sample.
    """
    if not isinstance(Z0, SiegelForm):
        Z0 = SiegelForm(Z0)
    if hbar <= 0.0:
        raise ValidationError("hbar must be positive", module="gaussian", guard="parameter")
    d = traj.d
    if Z0.d != d:
        raise ValidationError(f"shape dimension {Z0.d} != trajectory dimension {d}",
                              module="gaussian", guard="dimension")

    S = traj.S
    n = len(traj)
    Z_arr = mobius_transform_batch(S, Z0)

    # Covariance route 1: congruence transport with a plain matrix inverse,
    # deliberately independent of the shape route.
    G0 = wigner_form_from_siegel(Z0).G
    S_inv = np.linalg.inv(S)
    G_transport = np.einsum("nji,jk,nkl->nil", S_inv, G0, S_inv)

    # Covariance route 2: rebuilt from the evolved shape.
    im = Z_arr.imag
    re = Z_arr.real
    im_inv = np.linalg.inv(im)
    upper_right = -im_inv @ re
    G_shape = np.empty((n, 2 * d, 2 * d))
    G_shape[:, :d, :d] = im_inv
    G_shape[:, :d, d:] = upper_right
    G_shape[:, d:, :d] = np.transpose(upper_right, (0, 2, 1))
    G_shape[:, d:, d:] = im + re @ im_inv @ re
    G_shape = 0.5 * (G_shape + np.transpose(G_shape, (0, 2, 1)))

    # Scale-normalized: hyperbolic flows grow ||G|| ~ e^{2 nu t}, where an
    # absolute gap would merely restate the float resolution of G itself.
    g_scale = np.maximum(1.0, np.linalg.norm(G_shape, axis=(1, 2)))
    gap = np.linalg.norm(G_transport - G_shape, axis=(1, 2)) / g_scale

    tr_g = np.trace(G_shape, axis1=1, axis2=2)
    dx2 = 0.5 * hbar * np.trace(G_shape[:, :d, :d], axis1=1, axis2=2)
    dp2 = 0.5 * hbar * np.trace(G_shape[:, d:, d:], axis1=1, axis2=2)
    sigma = 0.5 * hbar * tr_g
    hs_s2 = np.linalg.norm(S, axis=(1, 2)) ** 2

    # Normalization branch: det(C_t Z_0 + D_t), argument unwrapped along t.
    denom = S[:, d:, :d] @ Z0.Z + S[:, d:, d:]
    w = np.linalg.det(denom)
    steps = np.angle(w[1:] / w[:-1])
    if steps.size and np.max(np.abs(steps)) > 0.5 * np.pi:
        k = int(np.argmax(np.abs(steps)))
        raise ResolutionError(
            f"normalization-branch phase jumps by {steps[k]:.3f} rad between "
            f"t={traj.times[k]:.6g} and t={traj.times[k + 1]:.6g}; "
            "re-run with a finer output grid", module="gaussian", guard="branch-tracking")
    argdet = np.concatenate([[np.angle(w[0])], np.angle(w[0]) + np.cumsum(steps)])

    theta = traj.W / hbar - 0.5 * argdet
    phases = np.exp(1j * theta)

    states = tuple(
        GaussianState(hbar, PhaseSpacePoint.from_vector(traj.X[k]),
                      SiegelForm(Z_arr[k]), complex(phases[k]))
        for k in range(n))
    widths = WidthSeries(hbar, traj.times, sigma, dx2, dp2, tr_g, hs_s2, gap)
    return PropagationResult(traj.times, states, widths, argdet)


def evaluate_wavefunction(state: GaussianState, x) -> np.ndarray:
    """Position-space values of a one-dimensional Gaussian state on a grid.

    The grid must be uniform and cover the packet; a norm deficit larger
    than 1e-4 trips the coverage guard.
    """
    if state.d != 1:
        raise ValidationError("grid evaluation is implemented for d = 1 only",
                              module="gaussian", guard="dimension")
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 8:
        raise ValidationError("x grid must be a 1-d array with several points",
                              module="gaussian", guard="grid")
    dx = np.diff(x)
    if np.max(np.abs(dx - dx[0])) > 1e-9 * abs(dx[0]):
        raise ValidationError("x grid must be uniform", module="gaussian", guard="grid")
    hbar = state.hbar
    p = state.center.p[0]
    q = state.center.q[0]
    z = state.shape.Z[0, 0]
    amp = (state.phase * (z.imag ** 0.25) / (np.pi * hbar) ** 0.25)
    delta = x - q
    psi = amp * np.exp((1j / hbar) * (p * delta + 0.5 * z * delta * delta))
    norm = np.sqrt(np.sum(np.abs(psi) ** 2) * dx[0])
    if abs(norm - 1.0) > 1e-4:
        raise CoverageError(
            f"grid does not cover the state (quadrature norm {norm:.6f}); "
            "extend the grid to at least 8 standard deviations",
            module="gaussian", guard="coverage")
    return psi


def wigner_function(state: GaussianState, Y) -> np.ndarray:
    """Phase-space density (pi hbar)^-d exp(-(Y-X)^T G (Y-X)/hbar).

    Positive everywhere and independent of the state's prefactor.  Y may be
    a PhaseSpacePoint or an array whose last axis has length 2d (vectorized
    evaluation).
    """
    if isinstance(Y, PhaseSpacePoint):
        Y = Y.vector
    Y = np.asarray(Y, dtype=float)
    d = state.d
    if Y.shape[-1] != 2 * d:
        raise ValidationError(f"phase-space points must have last axis 2d = {2 * d}",
                              module="gaussian", guard="shape")
    G = wigner_form_from_siegel(state.shape).G
    delta = Y - state.center.vector
    quad = np.einsum("...i,ij,...j->...", delta, G, delta)
    return np.exp(-quad / state.hbar) / (np.pi * state.hbar) ** d


def width_observable_error(widths: WidthSeries, oracle) -> np.ndarray:
    """Pointwise width error Delta(t) = exact width - semiclassical sigma_t.

    `oracle` is any object with matching `times` and `widths` arrays (the
    grid solver's evolution result).
    """
    times = np.asarray(oracle.times, dtype=float)
    exact = np.asarray(oracle.widths, dtype=float)
    if times.shape != widths.times.shape or np.max(
            np.abs(times - widths.times)) > 1e-9 * max(1.0, float(widths.times[-1])):
        raise ValidationError("width series are on different time grids",
                              module="gaussian", guard="grid-mismatch")
    return exact - widths.sigma
