"""Random test-data generators shared by the test modules."""

import numpy as np

from passivemc import RealizationArray


def cplx(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(rng, n):
    G = cplx(rng, n, n)
    return 0.5 * (G + G.conj().T)


def random_pd(rng, n, floor=0.1):
    G = cplx(rng, n, n)
    return G @ G.conj().T / n + floor * np.eye(n)


def random_unitary(rng, n):
    Q, R = np.linalg.qr(cplx(rng, n, n))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_isometry(rng, rows, cols):
    Q, _ = np.linalg.qr(cplx(rng, rows, cols))
    return Q


def with_norm(M, target):
    return M * (target / np.linalg.norm(M, 2))


def random_contraction(rng, rows, cols, norm=None, real=False):
    M = rng.standard_normal((rows, cols)) if real else cplx(rng, rows, cols)
    return with_norm(M, rng.uniform(0.05, 0.999) if norm is None else norm)


def sqrtm_pd(H):
    w, V = np.linalg.eigh(H)
    return (V * np.sqrt(w)) @ V.conj().T


def random_member(rng, H, alpha, norm=None):
    """A with ||H^(1/2) A H^(-1/2)|| = alpha * norm, norm < 1 by default."""
    S = sqrtm_pd(H)
    K = random_contraction(rng, H.shape[0], H.shape[0], norm)
    return alpha * np.linalg.solve(S, K @ S)


def random_indefinite_setup(rng, n, alpha):
    """Indefinite H = W* J W and a member of the open Stein set at `alpha`.

    Members are ``alpha W^-1 diag(M1, M2) W`` with ``||M1|| < 1`` and
    ``M2`` the inverse of a strict contraction, so that
    ``J - M* J M`` is positive definite.
    """
    p = int(rng.integers(1, n))
    q = n - p
    J = np.diag([1.0] * p + [-1.0] * q)
    # singular values in [0.5, 2] keep cond(H) <= 16
    W = (random_unitary(rng, n) * rng.uniform(0.5, 2.0, n)) @ random_unitary(rng, n)
    H = W.conj().T @ J @ W
    return H, W, J, p, q


def random_indefinite_member(rng, W, p, q, alpha):
    M1 = random_contraction(rng, p, p, rng.uniform(0.1, 0.9))
    M2 = np.linalg.inv(random_contraction(rng, q, q, rng.uniform(0.3, 0.9)))
    M = np.zeros((p + q, p + q), dtype=complex)
    M[:p, :p], M[p:, p:] = M1, M2
    M[:p, p:] = 0.01 * cplx(rng, p, q)
    return alpha * np.linalg.solve(W, M @ W)


def random_balanced_realization(rng, n, m, norm=None, real=False):
    """Array with ||R||_2 <= 1, i.e. passing the P = I KYP inequality."""
    return RealizationArray.from_matrix(random_contraction(rng, n + m, n + m, norm, real), n, m)


def random_stable_realization(rng, n, m, rho=0.9, scale=0.3):
    A = cplx(rng, n, n)
    if n:
        A *= rng.uniform(0.1, rho) / np.max(np.abs(np.linalg.eigvals(A)))
    return RealizationArray(A, scale * cplx(rng, n, m), scale * cplx(rng, m, n),
                            scale * cplx(rng, m, m))


def random_block_isometry(rng, n, m, k):
    """k pairs (v_n, v_m) of square blocks with sum v* v = I on both parts."""
    Vn = random_isometry(rng, k * n, n) if n else np.zeros((0, 0))
    Vm = random_isometry(rng, k * m, m)
    return tuple(
        (Vn[j * n:(j + 1) * n] if n else np.zeros((0, 0)), Vm[j * m:(j + 1) * m])
        for j in range(k)
    )


def random_z(rng, count, rmin=1.1, rmax=5.0):
    return rng.uniform(rmin, rmax, count) * np.exp(2j * np.pi * rng.random(count))


# Stacked 6 x n isometries compressing diag(F1, F2, F3) (orders 1, 2, 3)
# to orders 1, 2 and 3.
COMPRESSION_SIZES = (1, 2, 3)
COMPRESSIONS = (
    np.array([[6], [0], [2], [0], [3], [0]]) / 7,
    np.array([
        [0, 2 / 7],
        [-2 / 3, 3 / 7],
        [0, 0],
        [2 / 3, 0],
        [1 / 3, 6 / 7],
        [0, 0],
    ]),
    np.array([
        [0, 3 / 7, -2 / 3],
        [0, 6 / 7, 1 / 3],
        [3 / 5, 0, 0],
        [0, 2 / 7, 0],
        [4 / 5, 0, 0],
        [0, 0, 2 / 3],
    ]),
)
