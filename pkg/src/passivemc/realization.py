"""State-space realization arrays ``R = [[A, B], [C, D]]``.

The transfer function is ``F(z) = C (z I - A)^{-1} B + D``.  A
:class:`RealizationArray` can be read either as a system (the block view)
or as a single ``(n+m) x (n+m)`` matrix; both views are kept losslessly
interconvertible so that matrix operations (products, compressions,
repartitioning) apply directly to the array.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg
from .exceptions import (
    CertificateNotFound,
    InvalidInput,
    InvalidIsometry,
    NearPole,
    NotPositiveDefinite,
    ParameterOutOfRange,
    PreconditionFailed,
    ShapeError,
    UnstableA,
)
from .linalg import Verdict
from .serialization import matrix_from_dict, matrix_to_dict

__all__ = [
    "RealizationArray",
    "BlockDiagIsometryTuple",
    "KypCertificate",
    "evaluate",
    "series_product",
    "combine_realizations",
    "kyp_check",
    "kyp_check_balanced",
    "normalize_certificate",
    "certificate_search",
    "gramians",
    "rotation_realization",
    "reflect_realization",
    "planar_rotation",
    "repartition",
    "ExampleFamily",
    "example_family",
]

STABILITY_MARGIN = 1e-9


def _frozen(M):
    M.flags.writeable = False
    return M


@dataclass(frozen=True, eq=False)
class RealizationArray:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = linalg.as_square(self.D, "D")
        m = D.shape[0]
        A = np.asarray(self.A)
        if A.size == 0:
            A = np.zeros((0, 0))
        A = linalg.as_square(A, "A")
        n = A.shape[0]
        B = linalg.as_matrix(np.reshape(self.B, (n, m)) if np.size(self.B) == 0 else self.B, "B")
        C = linalg.as_matrix(np.reshape(self.C, (m, n)) if np.size(self.C) == 0 else self.C, "C")
        if B.shape != (n, m):
            raise ShapeError(f"B has shape {B.shape}, expected {(n, m)}")
        if C.shape != (m, n):
            raise ShapeError(f"C has shape {C.shape}, expected {(m, n)}")
        for name, M in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, _frozen(M))

    @classmethod
    def from_matrix(cls, R, n, m=None):
        """Split a square matrix into blocks with state order `n`."""
        R = linalg.as_square(R, "R")
        total = R.shape[0]
        if m is None:
            m = total - n
        if n < 0 or m < 1 or n + m != total:
            raise ShapeError(f"cannot partition a {total}x{total} array as (n={n}, m={m})")
        return cls(R[:n, :n], R[:n, n:], R[n:, :n], R[n:, n:])

    @classmethod
    def constant(cls, D):
        D = linalg.as_square(D, "D")
        m = D.shape[0]
        return cls(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((m, 0)), D)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.D.shape[0]

    @functools.cached_property
    def matrix(self):
        return _frozen(np.block([[self.A, self.B], [self.C, self.D]]))

    @functools.cached_property
    def poles(self):
        """Eigenvalues of `A` (candidate poles; some may cancel)."""
        return np.linalg.eigvals(self.A) if self.n else np.zeros(0, dtype=complex)

    def is_real(self):
        return not np.any(self.matrix.imag)

    def allclose(self, other, atol=1e-12):
        return (self.n, self.m) == (other.n, other.m) and np.allclose(
            self.matrix, other.matrix, rtol=0, atol=atol
        )

    def __call__(self, z):
        return evaluate(self, z)

    def __repr__(self):
        return f"RealizationArray(n={self.n}, m={self.m})"

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "A": matrix_to_dict(self.A),
            "B": matrix_to_dict(self.B),
            "C": matrix_to_dict(self.C),
            "D": matrix_to_dict(self.D),
        }

    @classmethod
    def from_dict(cls, d):
        """Parse block form, or ``{"n", "m", "matrix"}`` flattened form."""
        if not isinstance(d, dict):
            raise InvalidInput("realization must be a JSON object")
        if "realization" in d:
            return cls.from_dict(d["realization"])
        try:
            n = int(d["n"])
            if "matrix" in d:
                return cls.from_matrix(matrix_from_dict(d["matrix"]), n, d.get("m"))
            R = cls(*(matrix_from_dict(d[k]) for k in "ABCD"))
        except KeyError as exc:
            raise InvalidInput(f"realization is missing key {exc}") from None
        if R.n != n or ("m" in d and R.m != int(d["m"])):
            raise ShapeError("declared (n, m) do not match the block shapes")
        return R


def _pole_radius(z):
    return 1e-12 * (1.0 + abs(z))


def evaluate(R, z):
    """``F(z) = D + C (z I - A)^{-1} B`` via a linear solve.

    Raises :class:`NearPole` when `z` is within ``1e-12 (1 + |z|)`` of an
    eigenvalue of `A`.
    """
    z = complex(z)
    if R.n == 0:
        return np.array(R.D)
    dist = np.abs(R.poles - z)
    k = int(np.argmin(dist))
    if dist[k] <= _pole_radius(z):
        raise NearPole(z, complex(R.poles[k]))
    return R.D + R.C @ np.linalg.solve(z * np.eye(R.n) - R.A, R.B)


def evaluate_many(R, zs):
    """Vectorized :func:`evaluate`.

    Returns ``(values, valid)`` where ``values`` has shape ``(K, m, m)`` and
    ``valid`` masks the points that are not near a pole.  Invalid entries
    are NaN.
    """
    zs = np.asarray(zs, dtype=complex).ravel()
    out = np.broadcast_to(R.D, (zs.size, R.m, R.m)).copy()
    if R.n == 0:
        return out, np.ones(zs.size, dtype=bool)
    dist = np.abs(zs[:, None] - R.poles[None, :]).min(axis=1)
    valid = dist > 1e-12 * (1.0 + np.abs(zs))
    if np.any(valid):
        zv = zs[valid]
        M = zv[:, None, None] * np.eye(R.n) - R.A
        X = np.linalg.solve(M, np.broadcast_to(R.B, (zv.size, R.n, R.m)))
        out[valid] += R.C @ X
    out[~valid] = np.nan
    return out, valid


def series_product(Ra, Rb):
    """Cascade realization of ``F_a(z) F_b(z)``.

    The state of the result is ``(x_a, x_b)``; ``R_b`` feeds ``R_a``.
    """
    if Ra.m != Rb.m:
        raise ShapeError(f"cannot multiply {Ra.m}x{Ra.m} and {Rb.m}x{Rb.m} valued functions")
    na, nb = Ra.n, Rb.n
    A = np.block([[Ra.A, Ra.B @ Rb.C], [np.zeros((nb, na)), Rb.A]])
    B = np.vstack([Ra.B @ Rb.D, Rb.B])
    C = np.hstack([Ra.C, Ra.D @ Rb.C])
    return RealizationArray(A, B, C, Ra.D @ Rb.D)


@dataclass(frozen=True)
class BlockDiagIsometryTuple:
    """Pairs ``(v_{j,n}, v_{j,m})`` forming block-diagonal isometries.

    ``v_{j,n}`` has shape ``n_j x n`` and ``v_{j,m}`` shape ``m_j x m``, where
    ``(n_j, m_j)`` is the partition of the j-th realization.  Validity means
    both ``sum v_{j,n}* v_{j,n} = I_n`` and ``sum v_{j,m}* v_{j,m} = I_m``.
    """

    n: int
    m: int
    blocks: tuple

    def __post_init__(self):
        n, m = int(self.n), int(self.m)
        blocks = []
        for j, (vn, vm) in enumerate(self.blocks):
            vn = np.zeros((0, n)) if np.size(vn) == 0 else vn
            vn = linalg.as_matrix(vn, f"v_{j},n")
            vm = linalg.as_matrix(vm, f"v_{j},m")
            if vn.shape[1] != n or vm.shape[1] != m:
                raise ShapeError(f"block {j}: shapes {vn.shape}, {vm.shape} do not map onto (n={n}, m={m})")
            blocks.append((_frozen(vn), _frozen(vm)))
        if not blocks:
            raise ShapeError("need at least one block")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "blocks", tuple(blocks))

    def full_blocks(self):
        """The ``(n_j + m_j) x (n + m)`` block-diagonal matrices ``v_j``."""
        out = []
        for vn, vm in self.blocks:
            v = np.zeros((vn.shape[0] + vm.shape[0], self.n + self.m), dtype=complex)
            v[: vn.shape[0], : self.n] = vn
            v[vn.shape[0]:, self.n:] = vm
            out.append(v)
        return out

    def defect(self):
        total = sum(v.conj().T @ v for v in self.full_blocks())
        return float(np.linalg.norm(total - np.eye(self.n + self.m), 2))

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "blocks": [{"n": matrix_to_dict(vn), "m": matrix_to_dict(vm)} for vn, vm in self.blocks],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            pairs = tuple((matrix_from_dict(b["n"]), matrix_from_dict(b["m"])) for b in d["blocks"])
            return cls(d["n"], d["m"], pairs)
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"block-diagonal isometry tuple is malformed: {exc}") from None


def combine_realizations(t, realizations, tol=1e-10):
    """``sum_j v_j* R_j v_j`` on the matrix face, returned as an array."""
    if len(realizations) != len(t.blocks):
        raise ShapeError(f"{len(t.blocks)} isometry blocks but {len(realizations)} realizations")
    defect = t.defect()
    if defect > tol:
        raise InvalidIsometry(f"block-diagonal isometry defect {defect:.3g}")
    total = np.zeros((t.n + t.m, t.n + t.m), dtype=complex)
    for j, (v, R, (vn, vm)) in enumerate(zip(t.full_blocks(), realizations, t.blocks)):
        if (R.n, R.m) != (vn.shape[0], vm.shape[0]):
            raise ShapeError(f"realization {j} has partition {(R.n, R.m)}, block expects "
                             f"{(vn.shape[0], vm.shape[0])}")
        total += v.conj().T @ R.matrix @ v
    return RealizationArray.from_matrix(total, t.n, t.m)


@dataclass(frozen=True)
class KypCertificate:
    """``residual = diag(P, I) - R* diag(P, I) R`` and its PSD verdict."""

    P: np.ndarray
    residual: np.ndarray
    lambda_min: float
    verdict: Verdict

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "lambda_min": self.lambda_min,
            "P": matrix_to_dict(self.P),
            "residual": matrix_to_dict(self.residual),
        }


def _kyp(R, P, tol=None):
    W = np.zeros((R.n + R.m, R.n + R.m), dtype=complex)
    W[: R.n, : R.n] = P
    W[R.n:, R.n:] = np.eye(R.m)
    M = R.matrix
    residual = linalg.hermitize(W - M.conj().T @ W @ M)
    verdict = linalg.is_psd(residual, tol=tol)
    return KypCertificate(P, residual, linalg.lambda_min(residual), verdict)


def kyp_check(R, P, tol=None):
    """Evaluate the bounded-real KYP inequality for a given ``P > 0``."""
    P = linalg.as_hermitian(P, "P")
    if P.shape[0] != R.n:
        raise ShapeError(f"P has order {P.shape[0]}, realization has n={R.n}")
    if R.n and linalg.is_psd(P, strict=True) is not Verdict.YES:
        raise NotPositiveDefinite("P must be positive definite")
    return _kyp(R, P, tol)


def kyp_check_balanced(R, tol=None):
    """KYP inequality with ``P = I``, i.e. ``I - R* R >= 0`` on the matrix face."""
    return _kyp(R, np.eye(R.n), tol)


def normalize_certificate(R, P, tol=1e-10):
    """Change coordinates so that the certificate `P` becomes the identity.

    With ``T = P^(1/2)`` the returned array is
    ``(T A T^-1, T B, C T^-1, D)``.
    """
    cert = kyp_check(R, P)
    if cert.verdict is not Verdict.YES:
        raise PreconditionFailed(f"P is not a KYP certificate (lambda_min={cert.lambda_min:.3g})")
    if R.n == 0:
        return R
    w, V = np.linalg.eigh(cert.P)
    T = (V * np.sqrt(w)) @ V.conj().T
    Tinv = (V / np.sqrt(w)) @ V.conj().T
    out = RealizationArray(T @ R.A @ Tinv, T @ R.B, R.C @ Tinv, R.D)
    check = kyp_check_balanced(out)
    if check.verdict is not Verdict.YES:
        raise PreconditionFailed(f"normalized array fails the balanced inequality "
                                 f"(lambda_min={check.lambda_min:.3g})")
    return out


def _require_stable(R):
    rho = linalg.spectral_radius(R.A) if R.n else 0.0
    if rho >= 1.0 - STABILITY_MARGIN:
        raise UnstableA(f"spectral radius of A is {rho!r}")
    return rho


def certificate_search(R, max_iter=20000, tol=1e-12):
    """Look for a KYP certificate by the bounded-real Riccati fixed point.

    Iterates ``P <- A*PA + C*C + (A*PB + C*D)(I - D*D - B*PB)^{-1}(B*PA + D*C)``
    from ``P = 0`` and validates the limit with the KYP inequality.  The
    returned `P` is positive semi-definite, which already suffices for the
    bounded-real conclusion; it is definite when ``(A, C)`` is observable.

    Raises
    ------
    UnstableA
        If the spectral radius of `A` is not below ``1 - 1e-9``.
    CertificateNotFound
        If the pivot ``I - D*D - B*PB`` loses definiteness, the iteration
        does not settle within `max_iter` steps, or the limit fails the
        KYP check.  This outcome is inconclusive.
    """
    _require_stable(R)
    A, B, C, D = R.A, R.B, R.C, R.D
    Ah, Bh, Ch, Dh = (M.conj().T for M in (A, B, C, D))
    m = R.m
    CC, DC = Ch @ C, Dh @ C
    base = np.eye(m) - Dh @ D
    P = np.zeros((R.n, R.n), dtype=complex)
    for _ in range(max_iter):
        pivot = linalg.hermitize(base - Bh @ P @ B)
        if linalg.is_psd(pivot, strict=True) is not Verdict.YES:
            raise CertificateNotFound("Riccati pivot I - D*D - B*PB is not positive definite")
        L = Ah @ P @ B + DC.conj().T
        P_next = linalg.hermitize(Ah @ P @ A + CC + L @ np.linalg.solve(pivot, L.conj().T))
        if R.n == 0:
            break
        step = float(np.linalg.norm(P_next - P, 2))
        P = P_next
        if step <= tol * (1.0 + float(np.linalg.norm(P, 2))):
            break
    else:
        raise CertificateNotFound(f"Riccati iteration did not converge in {max_iter} steps")
    if R.n and linalg.is_psd(P) is not Verdict.YES:
        raise CertificateNotFound("Riccati limit is not positive semi-definite")
    cert = _kyp(R, P)
    if cert.verdict is not Verdict.YES:
        raise CertificateNotFound(f"Riccati limit fails the KYP check (lambda_min={cert.lambda_min:.3g})")
    return cert


def _doubling(A, Q, tol=1e-12, max_iter=64):
    X, Ak = Q.copy(), A.copy()
    for _ in range(max_iter):
        inc = Ak @ X @ Ak.conj().T
        X = X + inc
        Ak = Ak @ Ak
        if np.linalg.norm(inc, 2) <= tol * (1.0 + np.linalg.norm(X, 2)):
            break
    return linalg.hermitize(X)


def gramians(R):
    """Controllability and observability Gramians ``(X, Y)``.

    ``X = A X A* + B B*`` and ``Y = A* Y A + C* C``, by the doubling
    iteration ``Q <- Q + A_k Q A_k*``, ``A_k <- A_k^2``.
    """
    _require_stable(R)
    if R.n == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    X = _doubling(R.A, R.B @ R.B.conj().T)
    Y = _doubling(R.A.conj().T, R.C.conj().T @ R.C)
    return X, Y


def rotation_realization(theta):
    """Orthogonal array ``[[cos, -sin], [sin, cos]]``; a degree-one all-pass."""
    c, s = np.cos(theta), np.sin(theta)
    return RealizationArray.from_matrix(np.array([[c, -s], [s, c]]), 1, 1)


def reflect_realization(theta):
    """``diag(-1, 1)`` times the rotation: symmetric orthogonal, det = -1."""
    c, s = np.cos(theta), np.sin(theta)
    return RealizationArray.from_matrix(np.array([[-c, s], [s, c]]), 1, 1)


def planar_rotation(size, p, q, theta):
    """Givens rotation in the ``(p, q)`` coordinate plane (0-based, ``p < q``)."""
    if not 0 <= p < q < size:
        raise IndexError(f"need 0 <= p < q < {size}, got p={p}, q={q}")
    G = np.eye(size)
    c, s = np.cos(theta), np.sin(theta)
    G[p, p] = G[q, q] = c
    G[p, q], G[q, p] = -s, s
    return G


def repartition(R, n, m):
    """Same matrix, different state/port split."""
    if n + m != R.n + R.m:
        raise ShapeError(f"(n={n}, m={m}) does not partition a {R.n + R.m}x{R.n + R.m} array")
    return RealizationArray.from_matrix(R.matrix, n, m)


class ExampleFamily(NamedTuple):
    """Degree one and two scalar DB functions generated by matrix operations."""

    f1: RealizationArray
    f2: RealizationArray
    f3: RealizationArray
    f4: RealizationArray
    f5: RealizationArray

# signed permutation used to build a second coordinate system for f4
_SWAP = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


def example_family(theta=0.5, a=3.0):
    r"""Generate the family f1..f5 from one degree-one DB function.

    * ``f1(z) = theta (a + z)/(a z + 1)``;
    * ``f2`` is ``diag(1, -1) R_f1 diag(-1, 1)``, i.e. ``theta (a - z)/(a z - 1)``;
    * ``f3`` is the average of the two arrays, ``theta (a^2 - 1)/(a^2 z)``;
    * ``f4 = f1 f2`` in a fixed degree-two realization;
    * ``f5`` averages ``R_f4`` with its conjugate by a signed permutation.
    """
    if not 0.0 < theta < 1.0:
        raise ParameterOutOfRange(f"theta must lie in (0, 1), got {theta!r}")
    if not a > 1.0:
        raise ParameterOutOfRange(f"a must exceed 1, got {a!r}")
    s = np.sqrt(theta * (a * a - 1.0))
    R1 = np.array([[-1.0, s], [s, theta]]) / a
    R2 = np.diag([1.0, -1.0]) @ R1 @ np.diag([-1.0, 1.0])
    R3 = 0.5 * (R1 + R2)
    R4 = np.array([
        [-1.0, theta / a * (1.0 - a * a), theta / a * s],
        [0.0, 1.0, s],
        [-s, theta / a * s, -theta**2 / a],
    ]) / a
    R5 = 0.5 * (R4 + _SWAP @ R4 @ _SWAP.T)
    return ExampleFamily(
        RealizationArray.from_matrix(R1, 1),
        RealizationArray.from_matrix(R2, 1),
        RealizationArray.from_matrix(R3, 1),
        RealizationArray.from_matrix(R4, 2),
        RealizationArray.from_matrix(R5, 2),
    )
