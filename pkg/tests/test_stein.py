import numpy as np
import pytest

from passivemc import stein
from passivemc.exceptions import (
    HNotPositiveDefinite,
    InvalidInput,
    NotOutside,
    PreconditionFailed,
    ShapeError,
)
from passivemc.linalg import Verdict
from passivemc.stein import SteinSetSpec

from helpers import (
    cplx,
    random_contraction,
    random_indefinite_member,
    random_indefinite_setup,
    random_member,
    random_pd,
    random_unitary,
    sqrtm_pd,
)


def test_spec_validation():
    with pytest.raises(InvalidInput):
        SteinSetSpec(np.eye(2), alpha=0.0)
    with pytest.raises(InvalidInput):
        SteinSetSpec(np.eye(2), alpha=-1.0)
    assert SteinSetSpec(np.eye(2)).positive_definite_H
    assert not SteinSetSpec(np.diag([1.0, -1.0])).positive_definite_H
    assert not SteinSetSpec(np.diag([1.0, 0.0])).positive_definite_H


def test_spec_json_round_trip(rng):
    spec = SteinSetSpec(random_pd(rng, 3), 0.7, closed=False)
    back = SteinSetSpec.from_dict(spec.to_dict())
    np.testing.assert_array_equal(back.H, spec.H)
    assert (back.alpha, back.closed) == (0.7, False)


def test_gap_zero_matrix():
    rep = stein.stein_gap(SteinSetSpec.identity(2, closed=False), np.zeros((2, 2)))
    np.testing.assert_allclose(rep.gap, np.eye(2))
    assert rep.member is Verdict.YES


def test_gap_boundary_open_vs_closed():
    A = np.diag([1.0, 0.0])
    closed = stein.stein_gap(SteinSetSpec.identity(2, closed=True), A)
    opened = stein.stein_gap(SteinSetSpec.identity(2, closed=False), A)
    assert closed.lambda_min == pytest.approx(0.0, abs=1e-15)
    assert closed.member is Verdict.YES
    assert opened.member is Verdict.MARGINAL


def test_gap_shape_error():
    with pytest.raises(ShapeError):
        stein.stein_gap(SteinSetSpec.identity(2), np.zeros((3, 3)))


def test_gap_member_cross_checked_with_norm(rng):
    spec = SteinSetSpec(np.diag([2.0, 1.0]), 1.0, closed=False)
    A = random_member(rng, spec.H, 1.0, norm=0.8)
    assert stein.weighted_norm(spec.H, A) == pytest.approx(0.8)
    assert stein.stein_gap(spec, A).member is Verdict.YES
    assert stein.norm_membership(spec, A) is Verdict.YES


def test_norm_membership_examples():
    spec = SteinSetSpec.identity(2, closed=False)
    assert stein.norm_membership(spec, 0.5 * random_unitary(np.random.default_rng(1), 2)) is Verdict.YES
    assert stein.norm_membership(spec, [[0.0, 2.0], [0.0, 0.0]]) is Verdict.NO


def test_norm_membership_needs_pd_H():
    with pytest.raises(HNotPositiveDefinite):
        stein.norm_membership(SteinSetSpec(np.diag([1.0, -1.0])), np.zeros((2, 2)))


def test_norm_membership_agrees_with_gap(rng):
    agree = 0
    for _ in range(500):
        n = int(rng.integers(1, 7))
        spec = SteinSetSpec(random_pd(rng, n), rng.uniform(0.3, 2.0), closed=bool(rng.integers(2)))
        A = random_member(rng, spec.H, spec.alpha, norm=rng.uniform(0.5, 1.5))
        by_norm = stein.norm_membership(spec, A)
        if by_norm is Verdict.MARGINAL:
            continue
        assert stein.stein_gap(spec, A).member is by_norm
        agree += 1
    assert agree > 400


def test_identity_weight_reduces_to_spectral_norm(rng):
    for _ in range(200):
        n = int(rng.integers(1, 6))
        alpha = rng.uniform(0.2, 2.0)
        A = cplx(rng, n, n) * rng.uniform(0.05, 1.0)
        nrm = np.linalg.norm(A, 2)
        if abs(nrm - alpha) < 1e-8:
            continue
        rep = stein.stein_gap(SteinSetSpec.identity(n, alpha), A)
        assert (rep.member is Verdict.YES) == (nrm <= alpha)


def test_scalar_disk_closure(rng):
    for _ in range(200):
        n = int(rng.integers(1, 6))
        spec = SteinSetSpec(random_pd(rng, n), rng.uniform(0.3, 2.0))
        A = random_member(rng, spec.H, spec.alpha)
        c = rng.uniform(0, 1) * np.exp(2j * np.pi * rng.random())
        assert stein.stein_gap(spec, c * A).member is Verdict.YES


def test_convexity(rng):
    for _ in range(500):
        n = int(rng.integers(1, 6))
        spec = SteinSetSpec(random_pd(rng, n), rng.uniform(0.3, 2.0))
        A = random_member(rng, spec.H, spec.alpha)
        B = random_member(rng, spec.H, spec.alpha)
        t = rng.uniform()
        assert stein.stein_gap(spec, t * A + (1 - t) * B).member is Verdict.YES


def test_product_closure_trivial():
    spec = SteinSetSpec.identity(2, closed=False)
    out = stein.product_closure_check(spec, np.zeros((2, 2)), np.zeros((2, 2)), 1.0)
    assert out.report.member is Verdict.YES
    assert out.alpha == 1.0


def test_product_closure_contractions(rng):
    spec = SteinSetSpec.identity(3, 1.0, closed=False)
    for _ in range(50):
        A = random_contraction(rng, 3, 3)
        B = random_contraction(rng, 3, 3)
        out = stein.product_closure_check(spec, A, B, 1.0)
        # direct oracle: ||AB|| < 1
        assert np.linalg.norm(A @ B, 2) < 1
        assert out.report.member is Verdict.YES


def test_product_closure_scaled(rng):
    H = random_pd(rng, 4)
    spec = SteinSetSpec(H, 2.0, closed=False)
    for _ in range(50):
        A = random_member(rng, H, 2.0)
        B = random_member(rng, H, 0.5)
        out = stein.product_closure_check(spec, A, B, 0.5)
        assert out.alpha == pytest.approx(1.0)
        direct = H - (A @ B).conj().T @ H @ (A @ B)
        assert np.linalg.eigvalsh(0.5 * (direct + direct.conj().T))[0] > 0
        assert out.report.member is Verdict.YES
        assert out.discrepancy <= 1e-10 * (1 + np.linalg.norm(out.report.gap, 2))


def test_product_closure_rejects_non_members():
    spec = SteinSetSpec.identity(2, closed=False)
    with pytest.raises(PreconditionFailed):
        stein.product_closure_check(spec, 2 * np.eye(2), np.zeros((2, 2)), 1.0)
    with pytest.raises(PreconditionFailed):
        stein.product_closure_check(spec, np.zeros((2, 2)), 2 * np.eye(2), 1.0)


def test_witness_rank_one():
    eps = 0.5
    u = np.array([1.0, 0.0, 0.0])
    v = np.array([0.0, 0.6, 0.8])
    B = (1 + eps) * np.outer(u, v)
    A, pn = stein.maximality_witness(B)
    assert pn == pytest.approx(2.25 / 2, rel=1e-12)
    assert pn == pytest.approx(1 + eps**2 / (1 + 2 * eps), rel=1e-12)


def test_witness_scalar_identity():
    A, pn = stein.maximality_witness(2 * np.eye(2))
    np.testing.assert_allclose(A, (2 / 3) * np.eye(2))
    assert pn == pytest.approx(4 / 3)


def test_witness_random(rng):
    for _ in range(20):
        B = random_contraction(rng, 5, 5, norm=1.2)
        A, pn = stein.maximality_witness(B)
        assert pn == pytest.approx(1.44 / 1.4, rel=1e-10)
        assert pn == pytest.approx(np.linalg.norm(A @ B, 2), rel=1e-12)
        assert np.linalg.norm(A, 2) < 1
        assert np.max(np.abs(np.linalg.eigvals(A @ B))) > 1


def test_witness_requires_outside():
    with pytest.raises(NotOutside):
        stein.maximality_witness(0.5 * np.eye(2))
    with pytest.raises(NotOutside):
        stein.maximality_witness(np.eye(2))


def test_spectral_radius_bound_examples():
    spec = SteinSetSpec.identity(3, 0.7)
    assert stein.spectral_radius_bound_check(spec, 0.9 * 0.7 * np.eye(3)) == pytest.approx(0.63)


def test_spectral_radius_bound_random(rng):
    for _ in range(200):
        n = int(rng.integers(1, 9))
        spec = SteinSetSpec(random_pd(rng, n), rng.uniform(0.3, 2.0))
        A = random_member(rng, spec.H, spec.alpha, norm=rng.uniform(0.1, 1.0))
        rho = stein.spectral_radius_bound_check(spec, A)
        assert rho == pytest.approx(np.max(np.abs(np.linalg.eigvals(A))))
        assert rho <= spec.alpha * (1 + 1e-9)


def test_spectral_radius_bound_non_normal():
    H = np.diag([4.0, 1.0])
    S = sqrtm_pd(H)
    K = np.array([[0.3, 0.9], [0.0, 0.2]])
    K /= np.linalg.norm(K, 2)
    A = np.linalg.solve(S, K @ S)  # non-normal member on the boundary
    spec = SteinSetSpec(H, 1.0)
    assert stein.spectral_radius_bound_check(spec, A) <= 1.0


def test_spectral_radius_bound_precondition():
    with pytest.raises(PreconditionFailed):
        stein.spectral_radius_bound_check(SteinSetSpec.identity(2), 2 * np.eye(2))
    with pytest.raises(HNotPositiveDefinite):
        stein.spectral_radius_bound_check(SteinSetSpec(np.diag([1.0, -1.0])), np.zeros((2, 2)))


def test_indefinite_weight_product_closure(rng):
    for _ in range(100):
        n = int(rng.integers(2, 7))
        H, W, _, p, q = random_indefinite_setup(rng, n, 1.0)
        spec = SteinSetSpec(H, 0.8, closed=False)
        assert not spec.positive_definite_H
        A = random_indefinite_member(rng, W, p, q, 0.8)
        B = random_indefinite_member(rng, W, p, q, 1.5)
        if (stein.stein_gap(spec, A).member is not Verdict.YES
                or stein.stein_gap(spec.with_alpha(1.5), B).member is not Verdict.YES):
            continue
        out = stein.product_closure_check(spec, A, B, 1.5)
        assert out.report.member is Verdict.YES
        assert out.alpha == pytest.approx(1.2)
