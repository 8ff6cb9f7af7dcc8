"""Dense complex linear algebra with tolerance-aware Hermitian/PSD decisions.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every public
entry point funnels its operands through :func:`as_matrix`, so non-finite
data is rejected before any arithmetic happens.
"""

from __future__ import annotations

import enum

import numpy as np

from .exceptions import InvalidInput, NotHermitian, NotPSD, ShapeError

__all__ = [
    "Verdict",
    "as_matrix",
    "as_square",
    "as_hermitian",
    "default_tol",
    "hermitian_tol",
    "spectral_norm",
    "frobenius_norm",
    "hermitian_eigendecomposition",
    "svd",
    "is_psd",
    "lambda_min",
    "spectral_radius",
    "hermitian_sqrt",
    "hermitize",
]


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    MARGINAL = "marginal"

    def __bool__(self):
        return self is Verdict.YES


def as_matrix(M, name="matrix"):
    """Return `M` as a finite 2-D complex array (a copy)."""
    try:
        arr = np.array(M, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{name}: cannot convert to a complex matrix ({exc})") from None
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise InvalidInput(f"{name}: expected a 2-D array, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name}: contains NaN or Inf entries")
    return arr


def as_square(M, name="matrix"):
    arr = as_matrix(M, name)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name}: expected a square matrix, got shape {arr.shape}")
    return arr


def _norm2(arr):
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, 2))


def hermitian_tol(M):
    return 1e-12 * max(1.0, _norm2(M))


def default_tol(M):
    """Default decision tolerance ``1e-10 * (1 + ||M||_2)``."""
    return 1e-10 * (1.0 + _norm2(M))


def hermitize(M):
    """Symmetrize a matrix that is Hermitian up to rounding."""
    return 0.5 * (M + M.conj().T)


def as_hermitian(H, name="H", tol=None):
    arr = as_square(H, name)
    if tol is None:
        tol = hermitian_tol(arr)
    if arr.size and np.max(np.abs(arr - arr.conj().T)) > tol:
        raise NotHermitian(f"{name} is not Hermitian within {tol:.3g}")
    return hermitize(arr)


def spectral_norm(M):
    """Largest singular value of `M`."""
    return _norm2(as_matrix(M))


def frobenius_norm(M):
    arr = as_matrix(M)
    return float(np.sqrt(np.sum(np.abs(arr) ** 2)))


def hermitian_eigendecomposition(H):
    """Eigen-decomposition ``H = V diag(w) V*`` with `w` ascending."""
    arr = as_hermitian(H)
    w, V = np.linalg.eigh(arr)
    return w, V


def svd(M):
    """Thin SVD: returns ``(U, s, V)`` with ``M = U diag(s) V*``.

    Singular values are in descending order.  Note that `V` is returned,
    not its conjugate transpose.
    """
    arr = as_matrix(M)
    U, s, Vh = np.linalg.svd(arr, full_matrices=False)
    return U, s, Vh.conj().T


def lambda_min(H):
    arr = as_hermitian(H)
    if arr.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(arr)[0])


def is_psd(H, strict=False, tol=None):
    """Decide positive (semi-)definiteness of a Hermitian matrix.

    Parameters
    ----------
    H : array_like
        Hermitian matrix.
    strict : bool
        Test for positive definiteness instead of semi-definiteness.
    tol : float, optional
        Decision band around zero for the smallest eigenvalue.  Defaults to
        ``1e-10 * (1 + ||H||_2)``.

    Returns
    -------
    Verdict
        In strict mode an eigenvalue inside ``[-tol, tol]`` gives
        ``MARGINAL``; semi-definite mode never reports ``MARGINAL``.
    """
    arr = as_hermitian(H)
    if tol is None:
        tol = default_tol(arr)
    lmin = lambda_min(arr)
    if strict:
        if lmin > tol:
            return Verdict.YES
        if lmin >= -tol:
            return Verdict.MARGINAL
        return Verdict.NO
    return Verdict.YES if lmin >= -tol else Verdict.NO


def spectral_radius(A):
    arr = as_square(A, "A")
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(arr))))


def hermitian_sqrt(H, tol=None):
    """Positive semi-definite square root of a PSD matrix.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero; anything more
    negative raises :class:`NotPSD`.
    """
    arr = as_hermitian(H)
    if tol is None:
        tol = default_tol(arr)
    w, V = np.linalg.eigh(arr)
    if w.size and w[0] < -tol:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3g} is below -{tol:.3g}")
    w = np.clip(w, 0.0, None)
    return hermitize((V * np.sqrt(w)) @ V.conj().T)
