"""Scaled Stein sets ``(1/alpha) S_H`` and their closure laws.

A matrix ``A`` belongs to the open set when ``H - A* H A / alpha**2`` is
positive definite, and to the closed set when it is positive semi-definite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .exceptions import (
    CheckFailed,
    HNotPositiveDefinite,
    InvalidInput,
    NotOutside,
    PreconditionFailed,
    ShapeError,
)
from .linalg import Verdict
from .serialization import matrix_from_dict, matrix_to_dict

__all__ = [
    "SteinSetSpec",
    "SteinGapReport",
    "ProductClosure",
    "stein_gap",
    "norm_membership",
    "product_closure_check",
    "maximality_witness",
    "spectral_radius_bound_check",
]


@dataclass(frozen=True)
class SteinSetSpec:
    """The set ``(1/alpha) S_H`` (``closed=False``) or its closure."""

    H: np.ndarray
    alpha: float = 1.0
    closed: bool = True
    positive_definite_H: bool = field(init=False)

    def __post_init__(self):
        H = linalg.as_hermitian(self.H, "H")
        H.flags.writeable = False
        alpha = float(self.alpha)
        if not np.isfinite(alpha) or alpha <= 0:
            raise InvalidInput(f"alpha must be a positive number, got {self.alpha!r}")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "closed", bool(self.closed))
        object.__setattr__(
            self, "positive_definite_H", linalg.is_psd(H, strict=True) is Verdict.YES
        )

    @classmethod
    def identity(cls, n, alpha=1.0, closed=True):
        return cls(np.eye(n), alpha, closed)

    @property
    def n(self):
        return self.H.shape[0]

    def with_alpha(self, alpha):
        return SteinSetSpec(self.H, alpha, self.closed)

    def to_dict(self):
        return {"H": matrix_to_dict(self.H), "alpha": self.alpha, "closed": self.closed}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(matrix_from_dict(d["H"]), d.get("alpha", 1.0), d.get("closed", True))
        except KeyError as exc:
            raise InvalidInput(f"Stein set is missing key {exc}") from None


@dataclass(frozen=True)
class SteinGapReport:
    gap: np.ndarray
    lambda_min: float
    member: Verdict

    def to_dict(self):
        return {
            "gap": matrix_to_dict(self.gap),
            "lambda_min": self.lambda_min,
            "member": self.member.value,
        }


def _gap(H, A, alpha):
    return linalg.hermitize(H - (A.conj().T @ H @ A) / alpha**2)


def _check_order(spec, A, name="A"):
    A = linalg.as_square(A, name)
    if A.shape[0] != spec.n:
        raise ShapeError(f"{name} has order {A.shape[0]}, the Stein set has order {spec.n}")
    return A


def stein_gap(spec, A, tol=None):
    """Compute ``H - A* H A / alpha**2`` and decide membership of `A`.

    Membership is a positive definiteness test for the open set (so the
    boundary reports ``MARGINAL``) and a semi-definiteness test for the
    closed set.
    """
    A = _check_order(spec, A)
    gap = _gap(spec.H, A, spec.alpha)
    member = linalg.is_psd(gap, strict=not spec.closed, tol=tol)
    return SteinGapReport(gap, linalg.lambda_min(gap), member)


def weighted_norm(H, A):
    """``|| H^(1/2) A H^(-1/2) ||_2`` for positive definite `H`."""
    w, V = np.linalg.eigh(H)
    root = (V * np.sqrt(w)) @ V.conj().T
    inv_root = (V / np.sqrt(w)) @ V.conj().T
    return float(np.linalg.norm(root @ A @ inv_root, 2))


def norm_membership(spec, A, tol=None):
    """Membership via the weighted spectral norm (requires ``H > 0``).

    Compares ``|| H^(1/2) A H^(-1/2) ||_2`` with ``alpha``.  Values within
    ``tol`` (default ``1e-10 * (1 + alpha)``) of ``alpha`` are treated as
    boundary points: ``MARGINAL`` for the open set, members of the closed
    set.
    """
    if not spec.positive_definite_H:
        raise HNotPositiveDefinite("norm form of the Stein set needs H positive definite")
    A = _check_order(spec, A)
    if tol is None:
        tol = 1e-10 * (1.0 + spec.alpha)
    nrm = weighted_norm(spec.H, A)
    if spec.closed:
        return Verdict.YES if nrm <= spec.alpha + tol else Verdict.NO
    if nrm < spec.alpha - tol:
        return Verdict.YES
    if nrm <= spec.alpha + tol:
        return Verdict.MARGINAL
    return Verdict.NO


@dataclass(frozen=True)
class ProductClosure:
    """Outcome of :func:`product_closure_check`.

    ``constructive_residual`` is ``B* Q_a B / beta**2 + Q_b`` built from the
    two factor gaps; ``discrepancy`` is its spectral distance to the direct
    gap of the product.
    """

    report: SteinGapReport
    alpha: float
    constructive_residual: np.ndarray
    discrepancy: float


def product_closure_check(spec, A, B, beta, tol=None, match_tol=1e-10):
    """Show that ``AB`` lies in the Stein set scaled by ``alpha * beta``.

    `A` must belong to `spec` and `B` to the same set at scale `beta`.  The
    gap of the product is computed directly and also assembled from the
    factor gaps; the two must agree to ``match_tol * (1 + ||gap||_2)``.
    """
    A = _check_order(spec, A, "A")
    B = _check_order(spec, B, "B")
    spec_b = spec.with_alpha(beta)
    rep_a = stein_gap(spec, A, tol)
    rep_b = stein_gap(spec_b, B, tol)
    if rep_a.member is not Verdict.YES:
        raise PreconditionFailed(f"A is not a member (lambda_min={rep_a.lambda_min:.3g})")
    if rep_b.member is not Verdict.YES:
        raise PreconditionFailed(f"B is not a member (lambda_min={rep_b.lambda_min:.3g})")

    scale = spec.alpha * spec_b.alpha
    report = stein_gap(spec.with_alpha(scale), A @ B, tol)
    residual = linalg.hermitize(B.conj().T @ rep_a.gap @ B / spec_b.alpha**2 + rep_b.gap)
    discrepancy = float(np.linalg.norm(residual - report.gap, 2)) if residual.size else 0.0
    if discrepancy > match_tol * (1.0 + float(np.linalg.norm(report.gap, 2))):
        raise CheckFailed(f"constructive residual differs from the product gap by {discrepancy:.3g}")
    return ProductClosure(report, scale, residual, discrepancy)


def maximality_witness(B, tol=1e-10):
    """Partner in the open unit Stein set that makes ``AB`` expanding.

    With ``||B||_2 = 1 + eps`` the partner is ``A = B* / (1 + 2 eps)``; it
    has norm ``(1 + eps)/(1 + 2 eps) < 1`` while ``AB`` is positive
    semi-definite with norm and spectral radius ``(1 + eps)**2/(1 + 2 eps)``.

    Returns
    -------
    A : ndarray
    product_norm : float
        ``||AB||_2``.
    """
    B = linalg.as_square(B, "B")
    sigma1 = linalg.spectral_norm(B)
    if sigma1 <= 1.0:
        raise NotOutside(f"||B||_2 = {sigma1!r} does not exceed 1")
    eps = sigma1 - 1.0
    A = B.conj().T / (1.0 + 2.0 * eps)
    AB = A @ B

    expected_a = (1.0 + eps) / (1.0 + 2.0 * eps)
    expected_ab = (1.0 + eps) ** 2 / (1.0 + 2.0 * eps)
    product_norm = linalg.spectral_norm(AB)
    checks = {
        "||A||_2": (linalg.spectral_norm(A), expected_a),
        "||AB||_2": (product_norm, expected_ab),
        "rho(AB)": (linalg.spectral_radius(AB), expected_ab),
    }
    for label, (got, want) in checks.items():
        if abs(got - want) > tol * (1.0 + want):
            raise CheckFailed(f"{label} = {got!r}, expected {want!r}")
    if linalg.is_psd(linalg.hermitize(AB)) is not Verdict.YES:
        raise CheckFailed("AB is not positive semi-definite")
    return A, product_norm


def spectral_radius_bound_check(spec, A, tol=None):
    """Spectral radius of a member of the closed set, checked against alpha."""
    if not spec.positive_definite_H:
        raise HNotPositiveDefinite("the spectral radius bound needs H positive definite")
    A = _check_order(spec, A)
    closed = spec if spec.closed else SteinSetSpec(spec.H, spec.alpha, closed=True)
    report = stein_gap(closed, A, tol)
    if report.member is not Verdict.YES:
        raise PreconditionFailed(f"A is not in the closed set (lambda_min={report.lambda_min:.3g})")
    rho = linalg.spectral_radius(A)
    # eigenvalues of a defective boundary member carry O(sqrt(eps)) error
    if rho > spec.alpha * (1.0 + 1e-6):
        raise CheckFailed(f"spectral radius {rho!r} exceeds alpha={spec.alpha!r}")
    return rho
