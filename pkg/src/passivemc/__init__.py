"""Passive discrete-time LTI systems through matrix-convex Stein sets.

Submodules:

* :mod:`passivemc.linalg` -- tolerance-aware dense linear algebra;
* :mod:`passivemc.stein` -- scaled Stein sets and their closure laws;
* :mod:`passivemc.convexity` -- isometry tuples and matrix-convex combinations;
* :mod:`passivemc.realization` -- realization arrays and KYP certificates;
* :mod:`passivemc.db` -- bounded-real membership of rational functions;
* :mod:`passivemc.inclusions` -- difference inclusions.
"""

__version__ = "0.1.0"

from .convexity import (
    IsometryTuple,
    dilate_by_isometry,
    frobenius_counterexample,
    mconvex_combine,
    validate_isometry,
)
from .db import DbStatus, DbVerdict, db_check, db_mconvex_combine, db_product_check, realness_check
from .exceptions import *  # noqa: F401,F403
from .inclusions import MatrixSet, certify, certify_weighted, search_diagonal_weight, simulate
from .linalg import (
    Verdict,
    frobenius_norm,
    hermitian_eigendecomposition,
    hermitian_sqrt,
    is_psd,
    spectral_norm,
    spectral_radius,
    svd,
)
from .realization import (
    BlockDiagIsometryTuple,
    KypCertificate,
    RealizationArray,
    certificate_search,
    combine_realizations,
    evaluate,
    example_family,
    gramians,
    kyp_check,
    kyp_check_balanced,
    normalize_certificate,
    planar_rotation,
    reflect_realization,
    repartition,
    rotation_realization,
    series_product,
)
from .stein import (
    SteinGapReport,
    SteinSetSpec,
    maximality_witness,
    norm_membership,
    product_closure_check,
    spectral_radius_bound_check,
    stein_gap,
)
