"""Online optimization on SPD(n) with horospherical convexity certificates.

The affine-invariant geometry of symmetric positive definite matrices,
Riemannian online gradient descent with geodesic-ball projection, Tyler and
Frechet loss families, Busemann-function certificates, offline comparators,
and an experiment harness that writes CSV and SVG regret traces.
"""

from ._backend import NAME as BACKEND
from .errors import (ConvergenceError, DimensionMismatch, EigenvalueFloorViolation,
                     ManifoldError, NonFiniteError, RankDeficientError)
from .geometry import (BusemannEval, CertificateMargin, busemann, check_busemann_descent,
                       check_cosine_law, check_h_convexity, check_stewart,
                       check_strong_h_convexity)
from .losses import Frechet, Tyler, grad_norm, loss_grad, loss_value
from .manifold import (FeasibleSet, GeodesicBall, HadamardManifold, WholeManifold,
                       geodesic_point, project)
from .oracle import (OfflineResult, RegretTrace, compute_regret, karcher_mean,
                     offline_minimize, tyler_fixed_point)
from .rogd import Constant, Inverse, InverseSqrt, Trajectory, rogd_step, run_rogd, step_size
from .spd import (SPD, EIGEN_FLOOR, is_spd, load_matrix, matrix_fn, random_spd, save_matrix,
                  spd_dist, spd_exp, spd_geodesic, spd_inner, spd_log, spd_norm, sym_eig)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConvergenceError", "DimensionMismatch", "EigenvalueFloorViolation",
    "ManifoldError", "NonFiniteError", "RankDeficientError",
    "BusemannEval", "CertificateMargin", "busemann", "check_busemann_descent",
    "check_cosine_law", "check_h_convexity", "check_stewart", "check_strong_h_convexity",
    "Frechet", "Tyler", "grad_norm", "loss_grad", "loss_value",
    "FeasibleSet", "GeodesicBall", "HadamardManifold", "WholeManifold", "geodesic_point", "project",
    "OfflineResult", "RegretTrace", "compute_regret", "karcher_mean", "offline_minimize",
    "tyler_fixed_point",
    "Constant", "Inverse", "InverseSqrt", "Trajectory", "rogd_step", "run_rogd", "step_size",
    "SPD", "EIGEN_FLOOR", "is_spd", "load_matrix", "matrix_fn", "random_spd", "save_matrix",
    "spd_dist", "spd_exp", "spd_geodesic", "spd_inner", "spd_log", "spd_norm", "sym_eig",
]
