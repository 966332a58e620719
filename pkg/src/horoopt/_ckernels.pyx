# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SPD kernels.

Same contract as ``_pykernels``: inputs are validated square float64 arrays
of equal size. Every buffer handed to LAPACK/BLAS is treated as
column-major; inputs and outputs are symmetric so the storage order of the
caller's arrays does not matter.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, exp, pow
from libc.string cimport memcpy
from scipy.linalg.cython_lapack cimport dsyev, dpotrf, dpotrs
from scipy.linalg.cython_blas cimport dgemm

from .errors import EigenvalueFloorViolation, NonFiniteError

cnp.import_array()

cdef enum:
    SQRT = 0
    INV_SQRT = 1
    LOG = 2
    EXP = 3
    POWER = 4

cdef double EXP_LIMIT = 700.0


cdef inline int _eig(int n, double* A, double* w, double* work, int lwork,
                     bint vectors) noexcept nogil:
    cdef char jobz = b'N'
    if vectors:
        jobz = b'V'
    cdef char uplo = b'L'
    cdef int info = 0
    dsyev(&jobz, &uplo, &n, A, &n, w, work, &lwork, &info)
    return info


cdef inline void _gemm(char ta, char tb, int n, double* A, double* B,
                       double* C) noexcept nogil:
    cdef double one = 1.0, zero = 0.0
    dgemm(&ta, &tb, &n, &n, &n, &one, A, &n, B, &n, &zero, C, &n)


cdef inline void _sym_out(int n, double* Z, double* out) noexcept nogil:
    cdef int i, j
    for j in range(n):
        for i in range(n):
            out[i * n + j] = 0.5 * (Z[i + j * n] + Z[j + i * n])


cdef inline void _scale_cols(int n, double* src, double* d, double* dst) noexcept nogil:
    cdef int i, j
    for j in range(n):
        for i in range(n):
            dst[i + j * n] = src[i + j * n] * d[j]


cdef inline void _symmetrize(int n, double* A) noexcept nogil:
    cdef int i, j
    cdef double s
    for j in range(n):
        for i in range(j + 1, n):
            s = 0.5 * (A[i + j * n] + A[j + i * n])
            A[i + j * n] = s
            A[j + i * n] = s


cdef int _check_floor(double* w, int n, double floor, str what) except -1:
    if not (w[n - 1] > 0.0 and w[0] > floor * w[n - 1]):
        raise EigenvalueFloorViolation(
            f"{what}: eigenvalue {w[0]:.3e} at or below floor "
            f"{floor:.1e} x {w[n - 1]:.3e}")
    return 0


cdef class _Work:
    """Scratch buffers for one call, sized for an n x n problem."""
    cdef int n, lwork
    cdef double[::1] a, b, c, d, e, w, v, s, work

    def __cinit__(self, int n):
        self.n = n
        self.lwork = max(1, 34 * n)
        nn = n * n
        self.a = np.empty(nn)
        self.b = np.empty(nn)
        self.c = np.empty(nn)
        self.d = np.empty(nn)
        self.e = np.empty(nn)
        self.w = np.empty(n)
        self.v = np.empty(n)
        self.s = np.empty(n)
        self.work = np.empty(self.lwork)


cdef inline void _copy_in(double[:, ::1] X, double* dst, int n) noexcept nogil:
    memcpy(dst, &X[0, 0], n * n * sizeof(double))


def eigh_asc(double[:, ::1] A):
    """Ascending eigenvalues and eigenvectors (columns) of symmetric A."""
    cdef int n = A.shape[0]
    cdef _Work ws = _Work(n)
    cdef int info
    _copy_in(A, &ws.a[0], n)
    with nogil:
        info = _eig(n, &ws.a[0], &ws.w[0], &ws.work[0], ws.lwork, True)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed (info={info})")
    # column-major eigenvector buffer viewed row-major is Q^T
    Q = np.asarray(ws.a).reshape(n, n).T.copy()
    return np.asarray(ws.w).copy(), Q


def sym_fn(double[:, ::1] A, int kind, double p, double floor):
    cdef int n = A.shape[0]
    cdef _Work ws = _Work(n)
    cdef int i, info
    cdef double* w
    cdef double* f
    _copy_in(A, &ws.a[0], n)
    with nogil:
        info = _eig(n, &ws.a[0], &ws.w[0], &ws.work[0], ws.lwork, True)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed (info={info})")
    w = &ws.w[0]
    f = &ws.v[0]
    if kind == EXP:
        if w[n - 1] > EXP_LIMIT:
            raise NonFiniteError("matrix exponential overflows")
    elif 0 <= kind <= POWER:
        _check_floor(w, n, floor, "matrix function argument")
    else:
        raise ValueError(f"unknown matrix function code {kind}")
    for i in range(n):
        if kind == SQRT:
            f[i] = sqrt(w[i])
        elif kind == INV_SQRT:
            f[i] = 1.0 / sqrt(w[i])
        elif kind == LOG:
            f[i] = log(w[i])
        elif kind == EXP:
            f[i] = exp(w[i])
        else:
            f[i] = pow(w[i], p)
    out = np.empty((n, n))
    cdef double[:, ::1] o = out
    with nogil:
        _scale_cols(n, &ws.a[0], f, &ws.b[0])
        _gemm(b'N', b'T', n, &ws.b[0], &ws.a[0], &ws.c[0])
        _sym_out(n, &ws.c[0], &o[0, 0])
    return out


cdef double _whiten(_Work ws, double[:, ::1] X, double[:, ::1] Y,
                    double floor) except? -1.0:
    """Eigendecompose X into ws.a (Q) / ws.s (sqrt w), then whiten Y:
    ws.c <- C^T Y C with C = Q diag(1/sqrt w). Returns log cond(X)."""
    cdef int n = ws.n
    cdef int i, info
    cdef double logcond
    _copy_in(X, &ws.a[0], n)
    with nogil:
        info = _eig(n, &ws.a[0], &ws.w[0], &ws.work[0], ws.lwork, True)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed (info={info})")
    _check_floor(&ws.w[0], n, floor, "base point")
    logcond = log(ws.w[n - 1] / ws.w[0])
    with nogil:
        for i in range(n):
            ws.s[i] = sqrt(ws.w[i])
            ws.v[i] = 1.0 / ws.s[i]
        _scale_cols(n, &ws.a[0], &ws.v[0], &ws.b[0])          # C
        _copy_in(Y, &ws.d[0], n)
        _gemm(b'N', b'N', n, &ws.d[0], &ws.b[0], &ws.e[0])    # Y C
        _gemm(b'T', b'N', n, &ws.b[0], &ws.e[0], &ws.c[0])    # C^T Y C
        _symmetrize(n, &ws.c[0])
    return logcond


cdef object _recolor(_Work ws, double* f):
    """Given eigenvectors P of the whitened matrix in ws.c, return
    B diag(f) B^T with B = Q diag(sqrt w) P, symmetrized."""
    cdef int n = ws.n
    out = np.empty((n, n))
    cdef double[:, ::1] o = out
    with nogil:
        _scale_cols(n, &ws.a[0], &ws.s[0], &ws.b[0])          # Q diag(sqrt w)
        _gemm(b'N', b'N', n, &ws.b[0], &ws.c[0], &ws.d[0])    # B
        _scale_cols(n, &ws.d[0], f, &ws.e[0])                 # B diag(f)
        _gemm(b'N', b'T', n, &ws.e[0], &ws.d[0], &ws.b[0])    # B diag(f) B^T
        _sym_out(n, &ws.b[0], &o[0, 0])
    return out


def exp_map(double[:, ::1] X, double[:, ::1] U, double floor):
    cdef int n = X.shape[0]
    cdef _Work ws = _Work(n)
    cdef int i, info
    cdef double logcond = _whiten(ws, X, U, floor)
    cdef double* m = &ws.w[0]
    with nogil:
        info = _eig(n, &ws.c[0], m, &ws.work[0], ws.lwork, True)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed (info={info})")
    if m[n - 1] > EXP_LIMIT:
        raise NonFiniteError("exponential map overflows")
    for i in range(n):
        ws.v[i] = exp(m[i])
    Z = _recolor(ws, &ws.v[0])
    if logcond + (m[n - 1] - m[0]) >= -log(floor):
        _check_floor_result(Z, floor)
    return Z


def _check_floor_result(Z, double floor):
    w = np.linalg.eigvalsh(Z)
    if not (w[-1] > 0.0 and w[0] > floor * w[-1]):
        raise EigenvalueFloorViolation(
            f"exponential map result: eigenvalue {w[0]:.3e} at or below "
            f"floor {floor:.1e} x {w[-1]:.3e}")


cdef int _whitened_eig(_Work ws, double[:, ::1] X, double[:, ::1] Y,
                       double floor) except -1:
    cdef int n = ws.n
    cdef int info
    _whiten(ws, X, Y, floor)
    with nogil:
        info = _eig(n, &ws.c[0], &ws.w[0], &ws.work[0], ws.lwork, True)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed (info={info})")
    _check_floor(&ws.w[0], n, floor, "whitened target")
    return 0


def log_map(double[:, ::1] X, double[:, ::1] Y, double floor):
    cdef int n = X.shape[0]
    cdef _Work ws = _Work(n)
    cdef int i
    _whitened_eig(ws, X, Y, floor)
    for i in range(n):
        ws.v[i] = log(ws.w[i])
    return _recolor(ws, &ws.v[0])


def geodesic(double[:, ::1] X, double[:, ::1] Y, double t, double floor):
    cdef int n = X.shape[0]
    cdef _Work ws = _Work(n)
    cdef int i
    _whitened_eig(ws, X, Y, floor)
    for i in range(n):
        ws.v[i] = pow(ws.w[i], t)
    return _recolor(ws, &ws.v[0])


def dist(double[:, ::1] X, double[:, ::1] Y, double floor):
    cdef int n = X.shape[0]
    cdef _Work ws = _Work(n)
    cdef int i, info
    cdef double acc = 0.0, lk
    _whiten(ws, X, Y, floor)
    with nogil:
        info = _eig(n, &ws.c[0], &ws.w[0], &ws.work[0], ws.lwork, False)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed (info={info})")
    _check_floor(&ws.w[0], n, floor, "whitened target")
    for i in range(n):
        lk = log(ws.w[i])
        acc += lk * lk
    return sqrt(acc)


def inner(double[:, ::1] X, double[:, ::1] U, double[:, ::1] V):
    cdef int n = X.shape[0]
    cdef _Work ws = _Work(n)
    cdef int info = 0, i
    cdef char uplo = b'L'
    cdef double acc = 0.0
    _copy_in(X, &ws.a[0], n)
    _copy_in(U, &ws.b[0], n)
    _copy_in(V, &ws.c[0], n)
    with nogil:
        dpotrf(&uplo, &n, &ws.a[0], &n, &info)
    if info != 0:
        raise EigenvalueFloorViolation("base point is not positive definite")
    with nogil:
        dpotrs(&uplo, &n, &n, &ws.a[0], &n, &ws.b[0], &n, &info)   # X^-1 U
        dpotrs(&uplo, &n, &n, &ws.a[0], &n, &ws.c[0], &n, &info)   # X^-1 V
        # tr(AB) = sum_ij A_ij B_ji
        for i in range(n * n):
            acc += ws.b[i] * ws.c[(i % n) * n + i // n]
    return acc
