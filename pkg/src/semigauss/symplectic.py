"""Dense linear algebra for symplectic matrices and Gaussian shape forms.

Conventions used throughout the package:

* phase-space vectors are ordered X = (p, q), momenta first;
* the symplectic unity is J = [[0, -I], [I, 0]] in that ordering;
* a wave-packet shape is a complex symmetric d x d matrix Z with
  positive-definite imaginary part (a point of the Siegel upper
  half-space), and its phase-space covariance form G is the real
  symmetric 2d x 2d matrix with det G = 1 assembled from Re Z, Im Z.

All operations are pure functions of immutable values and are safe to
call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, ValidationError

# Default tolerance for structural symplecticity checks.  Double precision
# ODE output degrades symplecticity gradually; tests must distinguish that
# drift from actual bugs.
TOL_SYMPL = 1e-8

# A shape matrix must be symmetric to this absolute tolerance before the
# constructor symmetrizes it.
ASYMMETRY_TOL = 1e-10

# Relative floor for the positive-definiteness test of Im Z; keeps strongly
# squeezed states from being rejected.
PD_RELATIVE_FLOOR = 1e-12


def hs_norm(M) -> float:
    """Hilbert-Schmidt (Frobenius) norm sqrt(tr(M^dagger M))."""
    return float(np.linalg.norm(np.asarray(M)))


def symplectic_unity(d: int) -> np.ndarray:
    """The 2d x 2d matrix J = [[0, -I], [I, 0]] for (p, q) ordering."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValidationError(
            f"phase-space dimension must be a positive integer, got {d!r}",
            module="symplectic", guard="dimension")
    J = np.zeros((2 * d, 2 * d))
    J[:d, d:] = -np.eye(d)
    J[d:, :d] = np.eye(d)
    return J


def symplectic_defect(S) -> float:
    """HS norm of S^T J S - J; zero exactly on the symplectic group."""
    S = np.asarray(S, dtype=float)
    d = S.shape[0] // 2
    J = symplectic_unity(d)
    return hs_norm(S.T @ J @ S - J)


def require_symplectic(S, tol: float = TOL_SYMPL) -> np.ndarray:
    """Validate a candidate symplectic matrix; returns it as an ndarray."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        raise ValidationError(
            f"expected a square even-dimensional matrix, got shape {S.shape}",
            module="symplectic", guard="shape")
    defect = symplectic_defect(S)
    det_defect = abs(np.linalg.det(S) - 1.0)
    if defect > tol or det_defect > tol:
        raise ValidationError(
            f"matrix is not symplectic at tolerance {tol:g} "
            f"(defect {defect:.3e}, |det-1| {det_defect:.3e})",
            module="symplectic", guard="symplectic")
    return S


def polar_decompose(S, tol: float = TOL_SYMPL):
    """Split a symplectic S into orthogonal Q and positive-definite P.

    Returns (Q, P) with S = Q P, Q^T Q = I and P = (S^T S)^(1/2) computed
    by symmetric eigendecomposition; both factors are again symplectic.
    """
    S = require_symplectic(S, tol)
    w, V = np.linalg.eigh(S.T @ S)
    sqrt_w = np.sqrt(w)
    P = (V * sqrt_w) @ V.T
    P = 0.5 * (P + P.T)
    Q = S @ ((V / sqrt_w) @ V.T)
    return Q, P


@dataclass(frozen=True)
class PhaseSpacePoint:
    """A classical state X = (p, q) in R^{2d}."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float)).copy()
        q = np.atleast_1d(np.asarray(self.q, dtype=float)).copy()
        if p.ndim != 1 or q.ndim != 1 or p.size != q.size or p.size < 1:
            raise ValidationError(
                f"p and q must be equal-length vectors, got {p.shape} / {q.shape}",
                module="symplectic", guard="dimension")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise ValidationError("phase-space point has non-finite entries",
                                  module="symplectic", guard="finite")
        p.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_vector(cls, X) -> "PhaseSpacePoint":
        X = np.asarray(X, dtype=float).ravel()
        d = X.size // 2
        return cls(X[:d], X[d:])

    @property
    def d(self) -> int:
        return self.p.size

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.q])


class SiegelForm:
    """Complex symmetric shape matrix with positive-definite imaginary part."""

    __slots__ = ("Z",)

    def __init__(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
            raise ValidationError(f"shape matrix must be square, got {Z.shape}",
                                  module="symplectic", guard="shape")
        asym = np.max(np.abs(Z - Z.T)) if Z.size else 0.0
        if asym > ASYMMETRY_TOL:
            raise ValidationError(
                f"shape matrix asymmetry {asym:.3e} exceeds {ASYMMETRY_TOL:g}",
                module="symplectic", guard="symmetry")
        Z = 0.5 * (Z + Z.T)
        im = Z.imag
        eigs = np.linalg.eigvalsh(im)
        if eigs[0] <= PD_RELATIVE_FLOOR * max(hs_norm(im), 1e-300):
            raise ValidationError(
                f"Im(Z) is not positive definite (min eigenvalue {eigs[0]:.3e})",
                module="symplectic", guard="positive-definite")
        Z.flags.writeable = False
        object.__setattr__(self, "Z", Z)

    @property
    def d(self) -> int:
        return self.Z.shape[0]

    @property
    def real(self) -> np.ndarray:
        return self.Z.real

    @property
    def imag(self) -> np.ndarray:
        return self.Z.imag

    def distance(self, other: "SiegelForm") -> float:
        """HS-norm distance between two shape matrices."""
        return float(np.linalg.norm(self.Z - other.Z))

    def __repr__(self):
        return f"SiegelForm({self.Z!r})"


class WignerForm:
    """Real symmetric positive-definite covariance form with det G = 1."""

    __slots__ = ("G",)

    # Construction-time guard; the tight det G = 1 and J^T G J = G^{-1}
    # properties are exercised by the test suite at 1e-9.
    DET_TOL = 1e-6

    def __init__(self, G):
        G = np.atleast_2d(np.asarray(G, dtype=float))
        if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] % 2:
            raise ValidationError(
                f"covariance form must be square and even-dimensional, got {G.shape}",
                module="symplectic", guard="shape")
        asym = np.max(np.abs(G - G.T))
        if asym > ASYMMETRY_TOL:
            raise ValidationError(
                f"covariance form asymmetry {asym:.3e} exceeds {ASYMMETRY_TOL:g}",
                module="symplectic", guard="symmetry")
        G = 0.5 * (G + G.T)
        eigs = np.linalg.eigvalsh(G)
        if eigs[0] <= 0.0:
            raise ValidationError(
                f"covariance form is not positive definite (min eigenvalue {eigs[0]:.3e})",
                module="symplectic", guard="positive-definite")
        det = float(np.prod(eigs))
        # scale-aware: for strongly stretched forms the determinant itself is
        # only computable to ~ ||G||^2 * eps in double precision
        tol_det = max(self.DET_TOL, float(np.linalg.norm(G)) ** 2 * 1e-12)
        if abs(det - 1.0) > tol_det:
            raise ValidationError(
                f"covariance form has det {det:.8f}, expected 1 (pure state)",
                module="symplectic", guard="determinant")
        G.flags.writeable = False
        object.__setattr__(self, "G", G)

    @property
    def d(self) -> int:
        return self.G.shape[0] // 2

    def __repr__(self):
        return f"WignerForm({self.G!r})"


def _wigner_blocks(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    im_inv = np.linalg.inv(im)
    upper_left = im_inv
    upper_right = -im_inv @ re
    lower_right = im + re @ im_inv @ re
    G = np.block([[upper_left, upper_right],
                  [upper_right.T, lower_right]])
    return 0.5 * (G + G.T)


def wigner_form_from_siegel(Z: SiegelForm) -> WignerForm:
    """Covariance form G of the phase-space Gaussian with shape Z.

    Blocks: [[Im(Z)^-1, -Im(Z)^-1 Re(Z)],
             [-Re(Z) Im(Z)^-1, Im(Z) + Re(Z) Im(Z)^-1 Re(Z)]].
    """
    if not isinstance(Z, SiegelForm):
        Z = SiegelForm(Z)
    return WignerForm(_wigner_blocks(Z.real, Z.imag))


def siegel_from_wigner_form(G: WignerForm) -> SiegelForm:
    """Inverse of wigner_form_from_siegel (round-trips to identity)."""
    if not isinstance(G, WignerForm):
        G = WignerForm(G)
    d = G.d
    Gpp = G.G[:d, :d]
    Gpq = G.G[:d, d:]
    cond = np.linalg.cond(Gpp)
    if not np.isfinite(cond) or cond > 1e14:
        raise ValidationError(
            f"momentum block of the covariance form is singular (cond {cond:.3e})",
            module="symplectic", guard="singular-block")
    im = np.linalg.inv(Gpp)
    re = -im @ Gpq
    return SiegelForm(re + 1j * 0.5 * (im + im.T))


# Condition-number ceiling for the linear solve in the Möbius action.
MOBIUS_COND_LIMIT = 1e12


def mobius_transform(S, Z: SiegelForm, cond_limit: float = MOBIUS_COND_LIMIT) -> SiegelForm:
    """Fractional-linear action (A Z + B)(C Z + D)^{-1} of a symplectic S.

    This is how the linearized flow moves a wave-packet shape; it is a
    group action: acting with S2 after S1 equals acting with S2 @ S1.
    """
    if not isinstance(Z, SiegelForm):
        Z = SiegelForm(Z)
    S = np.asarray(S, dtype=float)
    d = Z.d
    if S.shape != (2 * d, 2 * d):
        raise ValidationError(
            f"symplectic matrix shape {S.shape} does not match shape dimension {d}",
            module="symplectic", guard="shape")
    A, B = S[:d, :d], S[:d, d:]
    C, D = S[d:, :d], S[d:, d:]
    denom = C @ Z.Z + D
    cond = np.linalg.cond(denom)
    if not np.isfinite(cond) or cond > cond_limit:
        raise ConditioningError(
            f"C Z + D is numerically singular (condition estimate {cond:.3e})",
            module="symplectic", guard="conditioning")
    numer = A @ Z.Z + B
    Znew = np.linalg.solve(denom.T, numer.T).T
    Znew = 0.5 * (Znew + Znew.T)
    return SiegelForm(Znew)


def mobius_transform_batch(S_stack: np.ndarray, Z0: SiegelForm) -> np.ndarray:
    """Vectorized Möbius action of a stack of symplectic matrices on one shape.

    Returns the raw (n, d, d) complex array of symmetrized shape matrices;
    callers wrap entries in SiegelForm as needed.
    """
    S_stack = np.asarray(S_stack, dtype=float)
    d = Z0.d
    A = S_stack[:, :d, :d]
    B = S_stack[:, :d, d:]
    C = S_stack[:, d:, :d]
    D = S_stack[:, d:, d:]
    denom = C @ Z0.Z + D
    numer = A @ Z0.Z + B
    Z = np.linalg.solve(np.transpose(denom, (0, 2, 1)), np.transpose(numer, (0, 2, 1)))
    Z = np.transpose(Z, (0, 2, 1))
    return 0.5 * (Z + np.transpose(Z, (0, 2, 1)))
