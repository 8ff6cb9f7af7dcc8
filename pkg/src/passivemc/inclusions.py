"""Difference inclusions ``x(j+1) in M x(j)`` and their contraction certificates.

At every step the next state is produced by an arbitrary member of the
finite set ``M``.  If every member has spectral norm at most ``alpha`` the
state norm decays at least like ``alpha**j`` whatever the switching; with a
weight ``H > 0`` the same holds in the norm ``||H^(1/2) x||_2``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg
from .exceptions import HNotPositiveDefinite, InvalidInput, ParameterOutOfRange, ShapeError
from .linalg import Verdict
from .serialization import matrix_from_dict, matrix_to_dict
from .stein import SteinSetSpec, stein_gap, weighted_norm

__all__ = [
    "MatrixSet",
    "Trajectory",
    "simulate",
    "certify",
    "certify_weighted",
    "search_diagonal_weight",
]

CERTIFY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MatrixSet:
    members: tuple

    def __post_init__(self):
        members = tuple(linalg.as_square(A, f"member {j}") for j, A in enumerate(self.members))
        if not members:
            raise ShapeError("a matrix set needs at least one member")
        n = members[0].shape[0]
        for j, A in enumerate(members):
            if A.shape[0] != n:
                raise ShapeError(f"member {j} has order {A.shape[0]}, expected {n}")
            A.flags.writeable = False
        object.__setattr__(self, "members", members)

    @property
    def n(self):
        return self.members[0].shape[0]

    def __len__(self):
        return len(self.members)

    def to_dict(self):
        return {"n": self.n, "members": [matrix_to_dict(A) for A in self.members]}

    @classmethod
    def from_dict(cls, d):
        try:
            out = cls(tuple(matrix_from_dict(A) for A in d["members"]))
        except KeyError as exc:
            raise InvalidInput(f"matrix set is missing key {exc}") from None
        if "n" in d and int(d["n"]) != out.n:
            raise ShapeError(f'declared n={d["n"]} but members have order {out.n}')
        return out


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray
    schedule: tuple
    norms: np.ndarray

    def to_dict(self):
        st = self.states
        return {
            "schedule": list(self.schedule),
            "norms": [float(v) for v in self.norms],
            "states": {
                "re": st.real.tolist(),
                **({"im": st.imag.tolist()} if np.any(st.imag) else {}),
            },
        }

    def to_csv(self):
        buf = io.StringIO()
        buf.write("j,norm,member\n")
        for j, nrm in enumerate(self.norms):
            member = self.schedule[j] if j < len(self.schedule) else ""
            buf.write(f"{j},{float(nrm)!r},{member}\n")
        return buf.getvalue()


def simulate(M, x0, steps, schedule="random", seed=None):
    """Run the inclusion for `steps` steps from `x0`.

    Parameters
    ----------
    schedule : {"random", "greedy"} or sequence of int
        ``"random"`` draws members uniformly with ``numpy.random.default_rng(seed)``;
        ``"greedy"`` picks the member maximizing ``||A x||_2`` (lowest index
        on ties); an explicit index sequence is repeated periodically.
    """
    x = np.asarray(x0, dtype=complex).ravel()
    if x.size != M.n:
        raise ShapeError(f"x0 has dimension {x.size}, the set has order {M.n}")
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be non-negative")

    if isinstance(schedule, str):
        if schedule not in ("random", "greedy"):
            raise ValueError(f"unknown schedule {schedule!r}")
        fixed = None
    else:
        fixed = [int(i) for i in schedule]
        if not fixed and steps:
            raise ValueError("an explicit schedule must not be empty")
        if any(not 0 <= i < len(M) for i in fixed):
            raise IndexError("schedule refers to a member that does not exist")
    rng = np.random.default_rng(seed)

    states = np.empty((steps + 1, M.n), dtype=complex)
    states[0] = x
    chosen = []
    for j in range(steps):
        if fixed is not None:
            idx = fixed[j % len(fixed)]
        elif schedule == "random":
            idx = int(rng.integers(len(M)))
        else:
            idx = int(np.argmax([np.linalg.norm(A @ x) for A in M.members]))
        x = M.members[idx] @ x
        states[j + 1] = x
        chosen.append(idx)
    return Trajectory(states, tuple(chosen), np.linalg.norm(states, axis=1))


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ParameterOutOfRange(f"alpha must lie in (0, 1], got {alpha!r}")
    return alpha


class InclusionCertificate(NamedTuple):
    ok: bool
    member_norms: tuple
    reports: tuple


def certify(M, alpha, tol=CERTIFY_TOL):
    """Is every member in the closed unit-weight Stein set at scale `alpha`?

    On success every trajectory obeys ``||x(j)||_2 <= alpha**j ||x(0)||_2``.
    A negative answer says nothing about divergence.
    """
    alpha = _check_alpha(alpha)
    spec = SteinSetSpec.identity(M.n, alpha, closed=True)
    norms = tuple(linalg.spectral_norm(A) for A in M.members)
    reports = tuple(stein_gap(spec, A) for A in M.members)
    return InclusionCertificate(all(v <= alpha + tol for v in norms), norms, reports)


class WeightedCertificate(NamedTuple):
    ok: bool
    reports: tuple
    weighted_norms: tuple
    beta: float


def certify_weighted(M, alpha, H):
    """Common Stein factor `H` certificate.

    On success ``||H^(1/2) x(j)||_2 <= alpha**j ||H^(1/2) x(0)||_2``, hence
    ``||x(j)||_2 <= beta alpha**j ||x(0)||_2`` with ``beta`` the condition
    number of ``H^(1/2)``.
    """
    alpha = _check_alpha(alpha)
    spec = SteinSetSpec(H, alpha, closed=True)
    if not spec.positive_definite_H:
        raise HNotPositiveDefinite("weight H must be positive definite")
    if spec.n != M.n:
        raise ShapeError(f"H has order {spec.n}, the set has order {M.n}")
    reports = tuple(stein_gap(spec, A) for A in M.members)
    wnorms = tuple(weighted_norm(spec.H, A) for A in M.members)
    w = np.linalg.eigvalsh(spec.H)
    beta = float(np.sqrt(w[-1] / w[0]))
    ok = all(r.member is Verdict.YES for r in reports)
    return WeightedCertificate(ok, reports, wnorms, beta)


def _diag_family(n, log_t):
    return np.diag(np.exp(log_t * np.arange(n)))


def search_diagonal_weight(M, alpha, max_log=20.0, grid=40, iters=60):
    """Search ``H = diag(1, t, t^2, ...)`` for a common Stein factor.

    ``log t`` is scanned outward from 0 on both sides; at the first scale
    that certifies the set, bisection against the previous scale finds the
    certifying weight closest to the identity (smallest ``beta``).  Returns
    ``(H, WeightedCertificate)`` or ``None`` if no scale in
    ``[-max_log, max_log]`` works.
    """
    alpha = _check_alpha(alpha)

    def works(lt):
        H = _diag_family(M.n, lt)
        return max(weighted_norm(H, A) for A in M.members) <= alpha

    if works(0.0):
        cert = certify_weighted(M, alpha, np.eye(M.n))
        if cert.ok:
            return np.eye(M.n), cert
    steps = np.linspace(0.0, max_log, grid + 1)
    for prev, cur in zip(steps[:-1], steps[1:]):
        for sign in (-1.0, 1.0):
            if not works(sign * cur):
                continue
            bad, good = sign * prev, sign * cur
            for _ in range(iters):
                mid = 0.5 * (bad + good)
                if works(mid):
                    good = mid
                else:
                    bad = mid
            for lt in (good, sign * cur):
                H = _diag_family(M.n, lt)
                cert = certify_weighted(M, alpha, H)
                if cert.ok:
                    return H, cert
    return None
