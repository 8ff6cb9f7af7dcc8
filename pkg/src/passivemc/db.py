"""Discrete-time bounded-real (DB) membership of rational matrix functions.

A function is DB when ``||F(z)||_2 <= 1`` for every ``|z| > 1``.  Two
one-sided tests are combined here: a KYP certificate proves membership,
while sampling ``F`` on circles outside the unit disk can only refute it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .convexity import validate_isometry
from .exceptions import (
    CertificateNotFound,
    InvalidIsometry,
    PreconditionFailed,
    ShapeError,
    UnstableA,
)
from .linalg import Verdict
from .realization import (
    KypCertificate,
    RealizationArray,
    certificate_search,
    evaluate_many,
    kyp_check_balanced,
    series_product,
)
from .serialization import matrix_to_dict

__all__ = [
    "DEFAULT_RADII",
    "DEFAULT_SAMPLES",
    "DbStatus",
    "DbVerdict",
    "db_check",
    "db_product_check",
    "db_mconvex_combine",
    "realness_check",
]

DEFAULT_RADII = (1.0 + 1e-6, 1.01, 1.1, 2.0, 10.0)
DEFAULT_SAMPLES = 720
SAMPLE_TOL = 1e-8
# sampled sup above 1 - BOUNDARY_BAND without a certificate is inconclusive
BOUNDARY_BAND = 1e-6
STABILITY_SLACK = 1e-9


class DbStatus(str, enum.Enum):
    CERTIFIED = "certified"
    SAMPLED_PASS = "sampled-pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    @property
    def passed(self):
        return self in (DbStatus.CERTIFIED, DbStatus.SAMPLED_PASS)


@dataclass(frozen=True)
class DbVerdict:
    verdict: DbStatus
    sampled_sup: float
    worst_z: complex
    certificate: KypCertificate | None = None
    notes: tuple = field(default=())

    @property
    def passed(self):
        return self.verdict.passed

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "sampled_sup": self.sampled_sup,
            "worst_z": {"re": self.worst_z.real, "im": self.worst_z.imag},
            "certificate": None if self.certificate is None else matrix_to_dict(self.certificate.P),
            "notes": list(self.notes),
        }


def _sample_points(n_samples, radii):
    phi = 2.0 * np.pi * np.arange(n_samples) / n_samples
    ring = np.exp(1j * phi)
    return np.concatenate([r * ring for r in radii])


def _probe_unstable_poles(R):
    """Points just outside the unit disk around eigenvalues of A with |lambda| > 1.

    If such an eigenvalue is a true pole the norm of F blows up on these
    probes; if it cancels, the probes behave like any other sample.
    """
    out = []
    for lam in R.poles:
        r = abs(lam)
        if r <= 1.0 + STABILITY_SLACK:
            continue
        for delta in (1e-3, 1e-5):
            rad = min(delta * r, 0.5 * (r - 1.0))
            out.append(lam + rad * np.exp(2j * np.pi * np.arange(16) / 16))
    return np.concatenate(out) if out else np.zeros(0, dtype=complex)


def _find_certificate(R, notes):
    balanced = kyp_check_balanced(R)
    if balanced.verdict is Verdict.YES:
        notes.append("balanced certificate P = I")
        return balanced
    try:
        cert = certificate_search(R)
    except (CertificateNotFound, UnstableA) as exc:
        notes.append(f"no certificate: {exc}")
        return None
    notes.append("certificate from Riccati iteration")
    return cert


def db_check(R, n_boundary_samples=DEFAULT_SAMPLES, radii=DEFAULT_RADII, tol=SAMPLE_TOL,
             search=True):
    """Test whether the transfer function of `R` is DB.

    Parameters
    ----------
    R : RealizationArray
    n_boundary_samples : int
        Equally spaced angles per circle.
    radii : sequence of float
        Circle radii, all greater than one.
    tol : float
        A sample with ``||F(z)||_2 > 1 + tol`` refutes membership.
    search : bool
        Try to find a KYP certificate (identity first, then the Riccati
        iteration).

    Returns
    -------
    DbVerdict
        ``certified`` when a certificate exists and no sample refutes it,
        ``fail`` with the worst sample as witness, ``sampled-pass`` when
        sampling stays clearly inside the unit ball, and ``inconclusive``
        when uncertified samples touch the boundary.
    """
    radii = tuple(float(r) for r in radii)
    if any(r <= 1.0 for r in radii):
        raise ValueError("sampling radii must exceed 1")
    notes = []
    certificate = _find_certificate(R, notes) if search else None

    zs = np.concatenate([_sample_points(int(n_boundary_samples), radii), _probe_unstable_poles(R)])
    zs = zs[np.abs(zs) > 1.0]
    values, valid = evaluate_many(R, zs)
    if not np.any(valid):
        return DbVerdict(DbStatus.INCONCLUSIVE, float("nan"), complex("nan"), certificate,
                         tuple(notes + ["every sample point is a pole"]))
    norms = np.full(zs.size, -np.inf)
    norms[valid] = np.linalg.norm(values[valid], 2, axis=(1, 2))
    k = int(np.argmax(norms))
    sup, worst = float(norms[k]), complex(zs[k])

    if sup > 1.0 + tol:
        status = DbStatus.FAIL
        if certificate is not None:
            notes.append("sampling contradicts the certificate")
    elif certificate is not None:
        status = DbStatus.CERTIFIED
    elif sup < 1.0 - BOUNDARY_BAND:
        status = DbStatus.SAMPLED_PASS
    else:
        status = DbStatus.INCONCLUSIVE
    return DbVerdict(status, sup, worst, certificate, tuple(notes))


def db_product_check(Ra, Rb, **kwargs):
    """DB test of ``F_a F_b``; both factors must pass :func:`db_check` first."""
    for name, R in (("first", Ra), ("second", Rb)):
        v = db_check(R, **kwargs)
        if not v.passed:
            raise PreconditionFailed(f"{name} factor is not DB ({v.verdict.value})")
    return db_check(series_product(Ra, Rb), **kwargs)


class CombinedFunction(NamedTuple):
    realization: RealizationArray
    verdict: DbVerdict


def db_mconvex_combine(t, realizations, check_points=8, **kwargs):
    """Realize ``G(z) = sum_j v_j* F_j(z) v_j`` and test it.

    `t` is an :class:`~passivemc.convexity.IsometryTuple` whose block
    ``v_j`` has ``m_j`` rows, the size of ``F_j``.  The states of the
    ``F_j`` are stacked; the isometry only acts on the ports.
    """
    if len(realizations) != len(t.blocks):
        raise ShapeError(f"{len(t.blocks)} isometry blocks but {len(realizations)} functions")
    check = validate_isometry(t)
    if not check.ok:
        raise InvalidIsometry(f"isometry defect {check.defect:.3g}")
    for j, (v, R) in enumerate(zip(t.blocks, realizations)):
        if v.shape[0] != R.m:
            raise ShapeError(f"block {j} has {v.shape[0]} rows, F_{j} is {R.m}x{R.m}")

    n_tot = sum(R.n for R in realizations)
    A = np.zeros((n_tot, n_tot), dtype=complex)
    Bs, Cs = [], []
    D = np.zeros((t.n, t.n), dtype=complex)
    off = 0
    for v, R in zip(t.blocks, realizations):
        A[off:off + R.n, off:off + R.n] = R.A
        Bs.append(R.B @ v)
        Cs.append(v.conj().T @ R.C)
        D += v.conj().T @ R.D @ v
        off += R.n
    G = RealizationArray(
        A,
        np.vstack(Bs) if n_tot else np.zeros((0, t.n)),
        np.hstack(Cs) if n_tot else np.zeros((t.n, 0)),
        D,
    )

    # spot-check the realization against the defining compression
    rng = np.random.default_rng(0)
    zs = (1.1 + 3.0 * rng.random(check_points)) * np.exp(2j * np.pi * rng.random(check_points))
    got, ok = evaluate_many(G, zs)
    want = sum(
        v.conj().T @ evaluate_many(R, zs)[0] @ v for v, R in zip(t.blocks, realizations)
    )
    err = np.max(np.abs(got[ok] - want[ok])) if np.any(ok) else 0.0
    if err > 1e-9 * (1.0 + np.max(np.abs(want[ok]), initial=0.0)):
        raise ArithmeticError(f"combined realization deviates from the compression by {err:.3g}")
    return CombinedFunction(G, db_check(G, **kwargs))


class RealnessCheck(NamedTuple):
    ok: bool
    max_imag: float


def realness_check(R, zs=(1.5, 2.0, -2.0, 3.0, -1.25, 10.0), tol=1e-10):
    """Is ``F(z)`` real at real, non-pole `zs`?"""
    zs = np.asarray(zs, dtype=float)
    values, valid = evaluate_many(R, zs.astype(complex))
    if not np.any(valid):
        return RealnessCheck(True, 0.0)
    worst = float(np.max(np.abs(values[valid].imag)))
    return RealnessCheck(worst <= tol, worst)
