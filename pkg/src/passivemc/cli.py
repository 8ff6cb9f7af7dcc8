"""Command-line front end.

Results go to standard output (or ``--out``) as JSON, or CSV for
trajectories; diagnostics go to standard error.  Exit codes: 0 pass,
1 fail, 2 inconclusive, 64 usage error, 65 unreadable input.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .convexity import IsometryTuple, mconvex_combine, validate_isometry
from .db import DEFAULT_RADII, DEFAULT_SAMPLES, SAMPLE_TOL, DbStatus, db_check, db_mconvex_combine
from .exceptions import (
    CertificateNotFound,
    InvalidInput,
    InvalidIsometry,
    NotOutside,
    ParameterOutOfRange,
    PassivityError,
    PreconditionFailed,
    ShapeError,
    UnstableA,
)
from .inclusions import MatrixSet, certify, certify_weighted, search_diagonal_weight, simulate
from .linalg import Verdict
from .realization import (
    RealizationArray,
    certificate_search,
    evaluate,
    example_family,
    kyp_check,
    kyp_check_balanced,
    normalize_certificate,
    repartition,
    series_product,
)
from .serialization import dumps, matrix_from_dict, matrix_to_dict
from .stein import SteinSetSpec, maximality_witness, norm_membership, stein_gap

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_DATAERR = 64, 65

_VERDICT_EXIT = {Verdict.YES: EXIT_PASS, Verdict.NO: EXIT_FAIL, Verdict.MARGINAL: EXIT_INCONCLUSIVE}
_DB_EXIT = {
    DbStatus.CERTIFIED: EXIT_PASS,
    DbStatus.SAMPLED_PASS: EXIT_PASS,
    DbStatus.FAIL: EXIT_FAIL,
    DbStatus.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def _parse(path, loader):
    try:
        return loader(_read_json(path))
    except (InvalidInput, ShapeError, InvalidIsometry, TypeError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None


def _matrix_loader(d):
    # accept the outputs of other subcommands that wrap a matrix
    if isinstance(d, dict) and "rows" not in d:
        for key in ("P", "certificate", "result", "A"):
            if key in d:
                return _matrix_loader(d[key])
    return matrix_from_dict(d)


def load_matrix(path):
    return _parse(path, _matrix_loader)


def load_realization(path):
    return _parse(path, RealizationArray.from_dict)


def _floats(text):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"expected a comma separated list of numbers, got {text!r}") from None


def _emit(args, payload, text=None):
    out = text if text is not None else dumps(payload) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _say(msg):
    print(msg, file=sys.stderr)


# -- subcommands -------------------------------------------------------------

def cmd_stein_check(args):
    spec = _parse(args.set, SteinSetSpec.from_dict)
    A = load_matrix(args.matrix)
    report = stein_gap(spec, A, tol=args.tol)
    payload = report.to_dict()
    payload["alpha"] = spec.alpha
    payload["closed"] = spec.closed
    if spec.positive_definite_H:
        payload["norm_member"] = norm_membership(spec, A).value
    _emit(args, payload)
    _say(f"stein-check: member={report.member.value} lambda_min={report.lambda_min:.6g}")
    return _VERDICT_EXIT[report.member]


def cmd_stein_witness(args):
    B = load_matrix(args.matrix)
    try:
        A, product_norm = maximality_witness(B)
    except NotOutside as exc:
        _say(f"stein-witness: {exc}")
        return EXIT_FAIL
    eps = float(np.linalg.norm(B, 2)) - 1.0
    _emit(args, {"A": matrix_to_dict(A), "epsilon": eps, "product_norm": product_norm})
    _say(f"stein-witness: ||AB||_2 = {product_norm:.12g} > 1")
    return EXIT_PASS


def cmd_mconvex(args):
    t = _parse(args.isometry, IsometryTuple.from_dict)
    mats = [load_matrix(p) for p in args.matrices]
    check = validate_isometry(t)
    if not check.ok:
        _emit(args, {"isometry_ok": False, "defect": check.defect})
        _say(f"mconvex: not an isometry (defect {check.defect:.3g})")
        return EXIT_FAIL
    result = mconvex_combine(t, mats)
    _emit(args, {"isometry_ok": True, "defect": check.defect, "result": matrix_to_dict(result)})
    return EXIT_PASS


def cmd_kyp_check(args):
    R = load_realization(args.realization)
    cert = kyp_check(R, load_matrix(args.cert), tol=args.tol) if args.cert else \
        kyp_check_balanced(R, tol=args.tol)
    _emit(args, cert.to_dict())
    _say(f"kyp-check: verdict={cert.verdict.value} lambda_min={cert.lambda_min:.6g}")
    return _VERDICT_EXIT[cert.verdict]


def cmd_certify_riccati(args):
    R = load_realization(args.realization)
    try:
        cert = certificate_search(R, max_iter=args.max_iter, tol=args.tol)
    except (CertificateNotFound, UnstableA) as exc:
        _emit(args, {"verdict": "not-found", "reason": str(exc), "P": None})
        _say(f"certify-riccati: inconclusive: {exc}")
        return EXIT_INCONCLUSIVE
    _emit(args, cert.to_dict())
    return EXIT_PASS


def cmd_balance(args):
    R = load_realization(args.realization)
    P = load_matrix(args.cert)
    try:
        out = normalize_certificate(R, P)
    except PreconditionFailed as exc:
        _say(f"balance: {exc}")
        return EXIT_FAIL
    _emit(args, out.to_dict())
    return EXIT_PASS


def _db_kwargs(args):
    return {"n_boundary_samples": args.samples, "radii": args.radii, "tol": args.tol}


def _report_db(verdict):
    msg = f"db: verdict={verdict.verdict.value} sampled_sup={verdict.sampled_sup:.12g}"
    if verdict.verdict is DbStatus.FAIL:
        msg += f" witness z={verdict.worst_z}"
    _say(msg)


def cmd_db_check(args):
    R = load_realization(args.realization)
    verdict = db_check(R, **_db_kwargs(args))
    _emit(args, verdict.to_dict())
    _report_db(verdict)
    return _DB_EXIT[verdict.verdict]


def cmd_db_combine(args):
    t = _parse(args.isometry, IsometryTuple.from_dict)
    Rs = [load_realization(p) for p in args.realizations]
    G, verdict = db_mconvex_combine(t, Rs, **_db_kwargs(args))
    _emit(args, {"realization": G.to_dict(), "db": verdict.to_dict()})
    _report_db(verdict)
    return _DB_EXIT[verdict.verdict]


def cmd_series_product(args):
    Rs = [load_realization(p) for p in args.realizations]
    out = Rs[0]
    for R in Rs[1:]:
        out = series_product(out, R)
    _emit(args, out.to_dict())
    return EXIT_PASS


def _schedule(text):
    if text in ("random", "greedy"):
        return text
    return [int(v) for v in _floats(text)]


def cmd_simulate(args):
    M = _parse(args.set, MatrixSet.from_dict)
    traj = simulate(M, _floats(args.x0), args.steps, _schedule(args.schedule), seed=args.seed)
    if args.format == "csv":
        _emit(args, None, traj.to_csv())
    else:
        _emit(args, traj.to_dict())
    return EXIT_PASS


def cmd_certify_inclusion(args):
    M = _parse(args.set, MatrixSet.from_dict)
    if args.weight or args.search_diagonal:
        if args.weight:
            H = load_matrix(args.weight)
            cert = certify_weighted(M, args.alpha, H)
        else:
            found = search_diagonal_weight(M, args.alpha)
            if found is None:
                _emit(args, {"ok": False, "weight": None})
                _say("certify-inclusion: no diagonal weight found (inconclusive)")
                return EXIT_INCONCLUSIVE
            H, cert = found
        payload = {
            "ok": cert.ok,
            "weight": matrix_to_dict(H),
            "weighted_norms": list(cert.weighted_norms),
            "beta": cert.beta,
        }
    else:
        cert = certify(M, args.alpha, tol=args.tol)
        payload = {"ok": cert.ok, "member_norms": list(cert.member_norms)}
    payload["alpha"] = args.alpha
    _emit(args, payload)
    _say(f"certify-inclusion: {'certified' if cert.ok else 'not certified (inconclusive)'}")
    # a failed certificate is not a proof of divergence
    return EXIT_PASS if cert.ok else EXIT_INCONCLUSIVE


def demo_report(theta, a):
    """Rebuild the generated family and re-check its closed-form values."""
    fam = example_family(theta, a)
    zs = [2.0, -1.5, 1.25 + 0.5j, 3j, -2.0 - 2.0j, 1.1]
    s = np.sqrt(theta * (1.0 - 1.0 / a**2))
    f1 = lambda z: theta * (a + z) / (a * z + 1)  # noqa: E731
    f2 = lambda z: theta * (a - z) / (a * z - 1)  # noqa: E731
    f3 = lambda z: theta / a**2 * (a**2 - 1) / z  # noqa: E731
    f4 = lambda z: theta**2 * (a**2 - z**2) / (a**2 * z**2 - 1)  # noqa: E731

    def matches(R, fn):
        return max(abs(evaluate(R, z)[0, 0] - fn(z)) for z in zs) <= 1e-10

    cascade = series_product(fam.f1, fam.f2)
    F6 = repartition(fam.f4, 1, 2)
    sel = np.array([0.0, 1.0])
    checks = {
        "f1 realized": matches(fam.f1, f1),
        "f2 realized": matches(fam.f2, f2),
        "f3 realized": matches(fam.f3, f3),
        "R_f3 = sqrt(theta(1-1/a^2)) [[0,1],[1,0]]":
            np.allclose(fam.f3.matrix, s * np.array([[0, 1], [1, 0]]), atol=1e-12),
        "R_f4 realizes f1*f2": matches(fam.f4, f4),
        "cascade f1*f2 realizes f4": matches(cascade, f4),
        "R_f1, R_f2, R_f3 balanced": all(
            kyp_check_balanced(R).verdict is Verdict.YES for R in fam[:3]
        ),
        "R_f4, R_f5 contractive": all(
            kyp_check_balanced(R).verdict is Verdict.YES for R in fam[3:]
        ),
        "compressed F6 = -(theta/a) f1": max(
            abs(sel @ evaluate(F6, z) @ sel + theta / a * f1(z)) for z in zs
        ) <= 1e-10,
    }
    poles_f5 = np.array(sorted(np.linalg.eigvals(fam.f5.A), key=lambda p: (p.imag, p.real)))
    payload = {
        "theta": theta,
        "a": a,
        "arrays": {name: matrix_to_dict(R.matrix) for name, R in zip(fam._fields, fam)},
        "poles_f5": [{"re": p.real, "im": p.imag} for p in poles_f5],
    }
    if np.isclose(theta, 0.5, rtol=0, atol=1e-15) and np.isclose(a, 3.0, rtol=0, atol=1e-15):
        f5 = lambda z: (16 / 9 - z**2) / (36 * (z**2 + 4 / 81))  # noqa: E731
        published = np.array([[0, -8, -10], [8, 0, 14], [14, 10, 1]]) / 36
        checks["R_f3 = (2/3)[[0,1],[1,0]]"] = np.allclose(
            fam.f3.matrix, 2 / 3 * np.array([[0, 1], [1, 0]]), atol=1e-12)
        checks["f5 realized"] = matches(fam.f5, f5)
        checks["poles of f5 = +-(2/9)i"] = np.allclose(poles_f5, [-2j / 9, 2j / 9], atol=1e-12)
        flip = np.diag([1.0, 1.0, -1.0])
        checks["R_f5 equals published display up to the output-row sign"] = np.allclose(
            flip @ fam.f5.matrix, published, atol=1e-12)
        payload["R_f5_times_36"] = np.round((36 * fam.f5.matrix).real, 12).tolist()
        payload["R_f5_published_display_exact"] = bool(
            np.allclose(fam.f5.matrix, published, atol=1e-12))
    payload["checks"] = {k: bool(v) for k, v in checks.items()}
    return payload


def cmd_demo_examples(args):
    payload = demo_report(args.theta, args.a)
    _emit(args, payload)
    for name, ok in payload["checks"].items():
        _say(f"[{'PASS' if ok else 'FAIL'}] {name}")
    if "R_f5_times_36" in payload:
        rows = "\n".join("    " + "  ".join(f"{v:5.0f}" for v in row) for row in payload["R_f5_times_36"])
        _say(f"R_f5 = (1/36) *\n{rows}")
    return EXIT_PASS if all(payload["checks"].values()) else EXIT_FAIL


# -- parser ------------------------------------------------------------------

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the result here instead of standard output")
    common.add_argument("--tol", type=float, default=None, help="decision tolerance")

    db_opts = _Parser(add_help=False)
    db_opts.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                         help=f"angles per circle (default {DEFAULT_SAMPLES})")
    db_opts.add_argument("--radii", type=_floats, default=list(DEFAULT_RADII),
                         help="comma separated circle radii > 1")

    parser = _Parser(prog="passivemc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, func, help, parents=(common,)):
        p = sub.add_parser(name, help=help, parents=list(parents), description=help)
        p.set_defaults(func=func)
        return p

    p = add("stein-check", cmd_stein_check, "membership of a matrix in a scaled Stein set")
    p.add_argument("--set", required=True)
    p.add_argument("--matrix", required=True)

    p = add("stein-witness", cmd_stein_witness, "partner A making A B expanding when ||B|| > 1")
    p.add_argument("--matrix", required=True)

    p = add("mconvex", cmd_mconvex, "matrix-convex combination sum v_j* A_j v_j")
    p.add_argument("--isometry", required=True)
    p.add_argument("--matrices", nargs="+", required=True)

    p = add("kyp-check", cmd_kyp_check, "KYP inequality for a realization (P = I by default)")
    p.add_argument("--realization", required=True)
    p.add_argument("--cert", help="matrix P > 0")

    p = add("certify-riccati", cmd_certify_riccati, "search a KYP certificate by Riccati iteration")
    p.add_argument("--realization", required=True)
    p.add_argument("--max-iter", type=int, default=20000)
    p.set_defaults(tol=1e-12)

    p = add("balance", cmd_balance, "change coordinates so that the certificate becomes P = I")
    p.add_argument("--realization", required=True)
    p.add_argument("--cert", required=True)

    p = add("db-check", cmd_db_check, "discrete-time bounded-real test", (common, db_opts))
    p.add_argument("--realization", required=True)
    p.set_defaults(tol=SAMPLE_TOL)

    p = add("db-combine", cmd_db_combine, "matrix-convex combination of DB functions",
            (common, db_opts))
    p.add_argument("--isometry", required=True)
    p.add_argument("--realizations", nargs="+", required=True)
    p.set_defaults(tol=SAMPLE_TOL)

    p = add("series-product", cmd_series_product, "cascade realization of F_1 F_2 ...")
    p.add_argument("--realizations", nargs="+", required=True)

    p = add("simulate", cmd_simulate, "simulate a difference inclusion")
    p.add_argument("--set", required=True)
    p.add_argument("--x0", required=True, help="comma separated initial state")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--schedule", default="random", help='"random", "greedy" or indices "0,1,..."')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = add("certify-inclusion", cmd_certify_inclusion, "contraction certificate for an inclusion")
    p.add_argument("--set", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--weight", help="positive definite weight H")
    p.add_argument("--search-diagonal", action="store_true",
                   help="search H = diag(1, t, t^2, ...)")
    p.set_defaults(tol=1e-10)

    p = add("demo-examples", cmd_demo_examples, "rebuild the generated DB family and check it")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--a", type=float, default=3.0)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _say(str(exc))
        return EXIT_USAGE
    except DataError as exc:
        _say(f"input error: {exc}")
        return EXIT_DATAERR
    except (ShapeError, InvalidIsometry, InvalidInput) as exc:
        _say(f"input error: {exc}")
        return EXIT_DATAERR
    except ParameterOutOfRange as exc:
        _say(f"usage error: {exc}")
        return EXIT_USAGE
    except PassivityError as exc:
        _say(f"error: {exc}")
        return EXIT_FAIL


def main():
    sys.exit(run())
