"""Isometry tuples and matrix-convex combinations ``sum_j v_j* A_j v_j``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import linalg
from .exceptions import InvalidInput, InvalidIsometry, NotIsometry, ShapeError
from .serialization import matrix_from_dict, matrix_to_dict

__all__ = [
    "ISOMETRY_TOL",
    "IsometryTuple",
    "IsometryCheck",
    "validate_isometry",
    "mconvex_combine",
    "FrobeniusCounterexample",
    "frobenius_counterexample",
    "dilate_by_isometry",
]

ISOMETRY_TOL = 1e-10


@dataclass(frozen=True)
class IsometryTuple:
    """Blocks ``v_1, ..., v_k`` of shapes ``eta_j x n``.

    The tuple is an isometry when ``sum_j v_j* v_j = I_n``; construction only
    checks shapes, :func:`validate_isometry` checks the identity.
    """

    n: int
    blocks: tuple

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ShapeError("target order n must be positive")
        blocks = tuple(linalg.as_matrix(b, f"block {j}") for j, b in enumerate(self.blocks))
        if not blocks:
            raise ShapeError("an isometry tuple needs at least one block")
        for j, b in enumerate(blocks):
            if b.shape[1] != n or b.shape[0] < 1:
                raise ShapeError(f"block {j} has shape {b.shape}, expected (eta >= 1, {n})")
            b.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_stacked(cls, stacked, sizes):
        """Split a tall ``(sum eta_j) x n`` matrix into row blocks."""
        stacked = linalg.as_matrix(stacked, "stacked isometry")
        if sum(sizes) != stacked.shape[0]:
            raise ShapeError(f"block sizes {sizes} do not add up to {stacked.shape[0]} rows")
        cuts = np.cumsum(sizes)[:-1]
        return cls(stacked.shape[1], tuple(np.split(stacked, cuts, axis=0)))

    @property
    def sizes(self):
        return tuple(b.shape[0] for b in self.blocks)

    def stacked(self):
        return np.vstack(self.blocks)

    def to_dict(self):
        return {"n": self.n, "blocks": [matrix_to_dict(b) for b in self.blocks]}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["n"], tuple(matrix_from_dict(b) for b in d["blocks"]))
        except KeyError as exc:
            raise InvalidInput(f"isometry tuple is missing key {exc}") from None


class IsometryCheck(NamedTuple):
    ok: bool
    defect: float


def validate_isometry(t, tol=ISOMETRY_TOL):
    """Return ``(ok, ||sum v_j* v_j - I_n||_2)``."""
    gram = sum(b.conj().T @ b for b in t.blocks)
    defect = float(np.linalg.norm(gram - np.eye(t.n), 2))
    return IsometryCheck(defect <= tol, defect)


def mconvex_combine(t, mats):
    """Matrix-convex combination ``sum_j v_j* A_j v_j``.

    Blocks may have different orders ``eta_j``; terms are accumulated in
    input order.
    """
    if len(mats) != len(t.blocks):
        raise ShapeError(f"{len(t.blocks)} isometry blocks but {len(mats)} matrices")
    check = validate_isometry(t)
    if not check.ok:
        raise InvalidIsometry(f"isometry defect {check.defect:.3g}")
    out = np.zeros((t.n, t.n), dtype=np.complex128)
    for j, (v, A) in enumerate(zip(t.blocks, mats)):
        A = linalg.as_square(A, f"A_{j}")
        if A.shape[0] != v.shape[0]:
            raise ShapeError(f"A_{j} has order {A.shape[0]}, block {j} expects {v.shape[0]}")
        out += v.conj().T @ A @ v
    return out


@dataclass(frozen=True)
class FrobeniusCounterexample:
    A: np.ndarray
    isometry: np.ndarray
    A_hat: np.ndarray
    norm_A: float
    norm_A_hat: float


def _frac_matmul(X, Y):
    return [[sum(X[i][k] * Y[k][j] for k in range(len(Y))) for j in range(len(Y[0]))]
            for i in range(len(X))]


def frobenius_counterexample():
    """The Frobenius ball of radius 5 is convex and unitarily invariant
    but not matrix-convex.

    ``A = diag(4, 3)`` sits on the boundary.  Compressing ``diag(A, A)``
    with the isometry selecting coordinates 1 and 3 gives ``4 I_2``, whose
    Frobenius norm ``4 sqrt(2)`` lies outside the ball.  The compression
    and the comparison ``32 > 25`` of squared norms are done in exact
    rational arithmetic.
    """
    Z, one = Fraction(0), Fraction(1)
    A = [[Fraction(4), Z], [Z, Fraction(3)]]
    big = [[A[i % 2][j % 2] if i // 2 == j // 2 else Z for j in range(4)] for i in range(4)]
    ups = [[one, Z], [Z, Z], [Z, one], [Z, Z]]
    ups_t = [list(col) for col in zip(*ups)]
    A_hat = _frac_matmul(_frac_matmul(ups_t, big), ups)

    if _frac_matmul(ups_t, ups) != [[one, Z], [Z, one]]:
        raise AssertionError("selection matrix is not an isometry")
    if A_hat != [[Fraction(4), Z], [Z, Fraction(4)]]:
        raise AssertionError("compression does not equal 4 I_2")
    sq_a = sum(x * x for row in A for x in row)
    sq_hat = sum(x * x for row in A_hat for x in row)
    if not (sq_a == 25 and sq_hat == 32 and sq_hat > sq_a):
        raise AssertionError("Frobenius norms do not separate")

    as_arr = lambda M: np.array([[float(x) for x in row] for row in M])  # noqa: E731
    return FrobeniusCounterexample(
        A=as_arr(A),
        isometry=as_arr(ups),
        A_hat=as_arr(A_hat),
        norm_A=linalg.frobenius_norm(as_arr(A)),
        norm_A_hat=linalg.frobenius_norm(as_arr(A_hat)),
    )


def dilate_by_isometry(U, A, tol=ISOMETRY_TOL):
    """Embed a 2x2 matrix as ``U A U*`` for an ``n x 2`` isometry `U`."""
    U = linalg.as_matrix(U, "U")
    A = linalg.as_square(A, "A")
    if U.shape[1] != A.shape[0]:
        raise ShapeError(f"U has {U.shape[1]} columns, A has order {A.shape[0]}")
    defect = float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1]), 2))
    if defect > tol:
        raise NotIsometry(f"U*U differs from the identity by {defect:.3g}")
    return U @ A @ U.conj().T
