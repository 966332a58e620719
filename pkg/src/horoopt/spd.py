"""SPD(n) with the affine-invariant metric.

Points are dense symmetric positive definite ``(n, n)`` float arrays and
tangent vectors are symmetric ``(n, n)`` arrays in the ambient
representation. The heavy lifting goes through :mod:`horoopt._backend`,
which is either the compiled kernel module or its numpy twin.

Every matrix-producing routine returns an exactly symmetric array.
Functions that need positivity refuse matrices whose smallest eigenvalue is
at or below ``EIGEN_FLOOR`` times the largest one instead of clamping.
"""

import io
import math

import numpy as np

from ._backend import kernels
from .errors import DimensionMismatch, NonFiniteError, ManifoldError
from .manifold import HadamardManifold

EIGEN_FLOOR = 1e-12
SYM_RTOL = 1e-12

_FN_CODES = {"sqrt": 0, "inv_sqrt": 1, "log": 2, "exp": 3, "power": 4}


def as_symmetric(A, name="matrix"):
    """Validate a square, finite, symmetric float matrix and return it as a
    C-contiguous float64 array."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise NonFiniteError(f"{name} has non-finite entries")
    scale = np.abs(A).max()
    if np.abs(A - A.T).max() > SYM_RTOL * scale:
        raise ManifoldError(f"{name} is not symmetric")
    return A


def _same_size(*mats):
    n = mats[0].shape[0]
    for M in mats[1:]:
        if M.shape[0] != n:
            raise DimensionMismatch(f"size mismatch: {n} vs {M.shape[0]}")
    return n


def sym_eig(A):
    """Eigendecomposition of a symmetric matrix.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in descending order.
    Q : ndarray, shape (n, n)
        Orthonormal eigenvectors as columns, ``A = Q diag(w) Q^T``.
    """
    A = as_symmetric(A)
    w, Q = kernels.eigh_asc(A)
    return w[::-1].copy(), Q[:, ::-1].copy()


def matrix_fn(A, fn, p=None):
    """Spectral matrix function ``Q diag(f(w)) Q^T``.

    ``fn`` is one of ``"sqrt"``, ``"inv_sqrt"``, ``"log"``, ``"exp"`` or
    ``"power"`` (which needs the exponent ``p``). All but ``"exp"`` require
    the eigenvalues to clear the floor.
    """
    try:
        code = _FN_CODES[fn]
    except KeyError:
        raise ValueError(f"unknown matrix function {fn!r}") from None
    if code == 4:
        if p is None:
            raise ValueError("power needs an exponent p")
        p = float(p)
    A = as_symmetric(A)
    return kernels.sym_fn(A, code, 0.0 if p is None else p, EIGEN_FLOOR)


def spd_inner(X, U, V):
    """Affine-invariant inner product ``tr(X^-1 U X^-1 V)``."""
    X, U, V = as_symmetric(X, "X"), as_symmetric(U, "U"), as_symmetric(V, "V")
    _same_size(X, U, V)
    return kernels.inner(X, U, V)


def spd_norm(X, U):
    return math.sqrt(max(spd_inner(X, U, U), 0.0))


def spd_exp(X, U):
    """Exponential map ``X^1/2 exp(X^-1/2 U X^-1/2) X^1/2``."""
    X, U = as_symmetric(X, "X"), as_symmetric(U, "U")
    _same_size(X, U)
    return kernels.exp_map(X, U, EIGEN_FLOOR)


def spd_log(X, Y):
    """Logarithmic map ``X^1/2 log(X^-1/2 Y X^-1/2) X^1/2``."""
    X, Y = as_symmetric(X, "X"), as_symmetric(Y, "Y")
    _same_size(X, Y)
    return kernels.log_map(X, Y, EIGEN_FLOOR)


def spd_dist(X, Y):
    """Geodesic distance ``||log(X^-1/2 Y X^-1/2)||_F``."""
    X, Y = as_symmetric(X, "X"), as_symmetric(Y, "Y")
    _same_size(X, Y)
    return kernels.dist(X, Y, EIGEN_FLOOR)


def spd_geodesic(X, Y, t):
    """Point ``X^1/2 (X^-1/2 Y X^-1/2)^t X^1/2`` for ``t`` in [0, 1]."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"geodesic parameter must lie in [0, 1], got {t}")
    X, Y = as_symmetric(X, "X"), as_symmetric(Y, "Y")
    _same_size(X, Y)
    return kernels.geodesic(X, Y, t, EIGEN_FLOOR)


def is_spd(X):
    try:
        X = as_symmetric(X)
    except ManifoldError:
        return False
    w = np.linalg.eigvalsh(X)
    return bool(w[-1] > 0 and w[0] > EIGEN_FLOOR * w[-1])


class SPD(HadamardManifold):
    """SPD(n) as a :class:`HadamardManifold`."""

    def __init__(self, n):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = int(n)

    def __repr__(self):
        return f"SPD({self.n})"

    def _check(self, *mats):
        for M in mats:
            if np.shape(M) != (self.n, self.n):
                raise DimensionMismatch(
                    f"expected ({self.n}, {self.n}) matrix, got {np.shape(M)}")

    def inner(self, x, U, V):
        self._check(x, U, V)
        return spd_inner(x, U, V)

    def exp(self, x, U):
        self._check(x, U)
        return spd_exp(x, U)

    def log(self, x, y):
        self._check(x, y)
        return spd_log(x, y)

    def dist(self, x, y):
        self._check(x, y)
        return spd_dist(x, y)

    def geodesic_point(self, x, y, t):
        self._check(x, y)
        return spd_geodesic(x, y, t)

    def identity(self):
        return np.eye(self.n)


# -- random instances ---------------------------------------------------------

def random_orthogonal(n, rng):
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def random_spd(n, rng, max_cond=1e2):
    """SPD matrix with log-uniform spectrum spanning at most ``max_cond``."""
    half = 0.5 * math.log(max_cond)
    w = np.exp(rng.uniform(-half, half, size=n))
    Q = random_orthogonal(n, rng)
    X = (Q * w) @ Q.T
    return 0.5 * (X + X.T)


def random_symmetric(n, rng, scale=1.0):
    A = rng.standard_normal((n, n)) * scale
    return 0.5 * (A + A.T)


# -- text serialization -------------------------------------------------------

def format_matrix(A):
    """Serialize: a line holding n, then n rows of n values with 17
    significant digits, space separated, LF endings."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    buf = io.StringIO()
    buf.write(f"{n}\n")
    for row in A:
        buf.write(" ".join(f"{v:.17g}" for v in row))
        buf.write("\n")
    return buf.getvalue()


def parse_matrix(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ValueError(f"bad dimension line {lines[0]!r}") from None
    if n < 1 or len(lines) != n + 1:
        raise ValueError(f"expected {n} rows after the dimension line, got {len(lines) - 1}")
    rows = [[float(tok) for tok in ln.split()] for ln in lines[1:]]
    if any(len(r) != n for r in rows):
        raise ValueError(f"every row must hold {n} values")
    return np.array(rows)


def save_matrix(path, A):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_matrix(A))


def load_matrix(path):
    with open(path) as fh:
        return parse_matrix(fh.read())
