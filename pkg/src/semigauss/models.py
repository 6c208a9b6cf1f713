"""Catalog of classical Hamiltonians with analytic gradients and Hessians.

Each model evaluates H(X), its gradient H'(X) = (dH/dp, dH/dq) and its
symmetric Hessian H''(X) for phase-space vectors X = (p, q).  With the
symplectic unity J of this package, Hamilton's equations read
Xdot = J H'(X), which reproduces pdot = -dH/dq, qdot = dH/dp.

Models are plain closures over their parameters, not symbolic
expressions: exact Hessians feed the variational equation, and the
catalog is small.  The polynomial growth assumptions required of a
symbol hold analytically for every member and are not re-checked at
runtime.  One-dimensional members also expose the potential V(q) in
vectorized form for the grid Schrödinger solver, which requires the
split form H = p^2/2 + V(q).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class HamiltonianModel:
    """Bundle of analytic evaluators for one classical Hamiltonian."""

    name: str
    d: int
    params: Mapping[str, float]
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    # V(q), vectorized over q arrays; None when no 1-d split form exists.
    potential: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None)

    def __repr__(self):
        ps = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"HamiltonianModel({self.name}({ps}), d={self.d})"


def _require(params: dict, name: str, key: str, positive: bool = False) -> float:
    if key not in params:
        raise ValidationError(f"model '{name}' requires parameter '{key}'",
                              module="models", guard="parameter")
    value = float(params.pop(key))
    if not np.isfinite(value):
        raise ValidationError(f"parameter '{key}' of '{name}' must be finite",
                              module="models", guard="parameter")
    if positive and value <= 0.0:
        raise ValidationError(f"parameter '{key}' of '{name}' must be > 0, got {value:g}",
                              module="models", guard="parameter")
    return value


def _harmonic(params: dict) -> HamiltonianModel:
    omega = _require(params, "harmonic", "omega", positive=True)
    w2 = omega * omega

    def value(X):
        p, q = X[0], X[1]
        return 0.5 * p * p + 0.5 * w2 * q * q

    def grad(X):
        return np.array([X[0], w2 * X[1]])

    def hess(X):
        return np.array([[1.0, 0.0], [0.0, w2]])

    return HamiltonianModel("harmonic", 1, {"omega": omega}, value, grad, hess,
                            potential=lambda q: 0.5 * w2 * np.square(q))


def _free(params: dict) -> HamiltonianModel:
    def value(X):
        return 0.5 * X[0] * X[0]

    def grad(X):
        return np.array([X[0], 0.0])

    def hess(X):
        return np.array([[1.0, 0.0], [0.0, 0.0]])

    return HamiltonianModel("free", 1, {}, value, grad, hess,
                            potential=lambda q: np.zeros_like(np.asarray(q, dtype=float)))


def _inverted(params: dict) -> HamiltonianModel:
    lam = _require(params, "inverted", "lam", positive=True)
    l2 = lam * lam

    def value(X):
        p, q = X[0], X[1]
        return 0.5 * p * p - 0.5 * l2 * q * q

    def grad(X):
        return np.array([X[0], -l2 * X[1]])

    def hess(X):
        return np.array([[1.0, 0.0], [0.0, -l2]])

    return HamiltonianModel("inverted", 1, {"lam": lam}, value, grad, hess,
                            potential=lambda q: -0.5 * l2 * np.square(q))


def _pendulum(params: dict) -> HamiltonianModel:
    v0 = _require(params, "pendulum", "v0", positive=True)

    def value(X):
        p, q = X[0], X[1]
        return 0.5 * p * p + v0 * (1.0 - np.cos(q))

    def grad(X):
        return np.array([X[0], v0 * np.sin(X[1])])

    def hess(X):
        return np.array([[1.0, 0.0], [0.0, v0 * np.cos(X[1])]])

    return HamiltonianModel("pendulum", 1, {"v0": v0}, value, grad, hess,
                            potential=lambda q: v0 * (1.0 - np.cos(q)))


def _wannier_stark(params: dict) -> HamiltonianModel:
    v = _require(params, "wannier_stark", "v", positive=True)
    eps = _require(params, "wannier_stark", "eps")

    def value(X):
        p, q = X[0], X[1]
        return 0.5 * p * p + v * np.cos(q) + eps * q

    def grad(X):
        return np.array([X[0], -v * np.sin(X[1]) + eps])

    def hess(X):
        return np.array([[1.0, 0.0], [0.0, -v * np.cos(X[1])]])

    return HamiltonianModel("wannier_stark", 1, {"v": v, "eps": eps}, value, grad, hess,
                            potential=lambda q: v * np.cos(q) + eps * np.asarray(q, dtype=float))


def _quartic(params: dict) -> HamiltonianModel:
    def value(X):
        p, q = X[0], X[1]
        return 0.5 * p * p + 0.25 * q ** 4

    def grad(X):
        return np.array([X[0], X[1] ** 3])

    def hess(X):
        return np.array([[1.0, 0.0], [0.0, 3.0 * X[1] ** 2]])

    return HamiltonianModel("quartic", 1, {}, value, grad, hess,
                            potential=lambda q: 0.25 * np.power(q, 4))


def _aniso_harmonic_2d(params: dict) -> HamiltonianModel:
    w1 = _require(params, "aniso_harmonic_2d", "omega1", positive=True)
    w2 = _require(params, "aniso_harmonic_2d", "omega2", positive=True)
    w_sq = np.array([w1 * w1, w2 * w2])

    def value(X):
        p, q = X[:2], X[2:]
        return 0.5 * float(p @ p) + 0.5 * float(w_sq @ (q * q))

    def grad(X):
        return np.concatenate([X[:2], w_sq * X[2:]])

    def hess(X):
        return np.diag(np.concatenate([np.ones(2), w_sq]))

    return HamiltonianModel("aniso_harmonic_2d", 2, {"omega1": w1, "omega2": w2},
                            value, grad, hess)


_CATALOG = {
    "harmonic": _harmonic,
    "free": _free,
    "inverted": _inverted,
    "pendulum": _pendulum,
    "wannier_stark": _wannier_stark,
    "quartic": _quartic,
    "aniso_harmonic_2d": _aniso_harmonic_2d,
}

MODEL_NAMES = tuple(sorted(_CATALOG))


def make_model(name: str, **params) -> HamiltonianModel:
    """Build a catalog model; raises on unknown names or bad parameters."""
    if name not in _CATALOG:
        raise ValidationError(
            f"unknown model '{name}'; catalog: {', '.join(MODEL_NAMES)}",
            module="models", guard="catalog")
    params = dict(params)
    model = _CATALOG[name](params)
    if params:
        raise ValidationError(
            f"model '{name}' does not accept parameter(s): {', '.join(sorted(params))}",
            module="models", guard="parameter")
    return model


@dataclass(frozen=True)
class DerivativeCheck:
    grad_error: float
    hess_error: float


def finite_difference_check(model: HamiltonianModel, X, h: float = 1e-5) -> DerivativeCheck:
    """Compare analytic H' and H'' with central differences at one point.

    Errors are max over components of |analytic - difference| / (1 + |analytic|).
    """
    if h <= 0.0:
        raise ValidationError("finite-difference step must be positive",
                              module="models", guard="parameter")
    X = np.asarray(getattr(X, "vector", X), dtype=float)
    n = X.size
    grad = model.grad(X)
    hess = model.hess(X)
    fd_grad = np.empty(n)
    fd_hess = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fd_grad[i] = (model.value(X + e) - model.value(X - e)) / (2.0 * h)
        fd_hess[:, i] = (model.grad(X + e) - model.grad(X - e)) / (2.0 * h)
    grad_error = float(np.max(np.abs(grad - fd_grad) / (1.0 + np.abs(grad))))
    hess_error = float(np.max(np.abs(hess - fd_hess) / (1.0 + np.abs(hess))))
    return DerivativeCheck(grad_error, hess_error)
