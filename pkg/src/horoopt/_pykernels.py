"""Pure numpy implementation of the SPD kernels.

Mirrors the compiled ``_ckernels`` module function for function. All inputs
are assumed validated (square, same size, finite, symmetric); callers in
:mod:`horoopt.spd` take care of that.
"""

import numpy as np

from .errors import EigenvalueFloorViolation, NonFiniteError

SQRT, INV_SQRT, LOG, EXP, POWER = 0, 1, 2, 3, 4

# exp() of anything larger overflows a double
EXP_LIMIT = 700.0


def _sym(A):
    return 0.5 * (A + A.T)


def _check_floor(w, floor, what):
    # w ascending
    if not (w[-1] > 0.0 and w[0] > floor * w[-1]):
        raise EigenvalueFloorViolation(
            f"{what}: eigenvalue {w[0]:.3e} at or below floor "
            f"{floor:.1e} x {w[-1]:.3e}")


def eigh_asc(A):
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric A."""
    w, Q = np.linalg.eigh(A)
    return w, Q


def _apply(w, kind, p):
    if kind == SQRT:
        return np.sqrt(w)
    if kind == INV_SQRT:
        return 1.0 / np.sqrt(w)
    if kind == LOG:
        return np.log(w)
    if kind == EXP:
        return np.exp(w)
    if kind == POWER:
        return w ** p
    raise ValueError(f"unknown matrix function code {kind}")


def sym_fn(A, kind, p, floor):
    w, Q = np.linalg.eigh(A)
    if kind == EXP:
        if w[-1] > EXP_LIMIT:
            raise NonFiniteError("matrix exponential overflows")
    else:
        _check_floor(w, floor, "matrix function argument")
    return _sym((Q * _apply(w, kind, p)) @ Q.T)


def _whiten(X, floor):
    # Returns Q, sqrt(w), log cond(X) with X = Q diag(w) Q^T.
    w, Q = np.linalg.eigh(X)
    _check_floor(w, floor, "base point")
    return Q, np.sqrt(w), np.log(w[-1] / w[0])


def exp_map(X, U, floor):
    Q, sw, logcond = _whiten(X, floor)
    C = Q / sw
    m, P = np.linalg.eigh(_sym(C.T @ U @ C))
    if m[-1] > EXP_LIMIT:
        raise NonFiniteError("exponential map overflows")
    B = (Q * sw) @ P
    Z = _sym((B * np.exp(m)) @ B.T)
    # cond(Z) <= cond(X) * exp(m_max - m_min); only pay for an extra
    # eigendecomposition when the bound cannot rule out a floor violation.
    if logcond + (m[-1] - m[0]) >= -np.log(floor):
        _check_floor(np.linalg.eigvalsh(Z), floor, "exponential map result")
    return Z


def _whitened_pair(X, Y, floor):
    Q, sw, _ = _whiten(X, floor)
    C = Q / sw
    k, P = np.linalg.eigh(_sym(C.T @ Y @ C))
    _check_floor(k, floor, "whitened target")
    return Q, sw, k, P


def log_map(X, Y, floor):
    Q, sw, k, P = _whitened_pair(X, Y, floor)
    B = (Q * sw) @ P
    return _sym((B * np.log(k)) @ B.T)


def geodesic(X, Y, t, floor):
    Q, sw, k, P = _whitened_pair(X, Y, floor)
    B = (Q * sw) @ P
    return _sym((B * k ** t) @ B.T)


def dist(X, Y, floor):
    Q, sw, _ = _whiten(X, floor)
    C = Q / sw
    k = np.linalg.eigvalsh(_sym(C.T @ Y @ C))
    _check_floor(k, floor, "whitened target")
    return float(np.sqrt(np.sum(np.log(k) ** 2)))


def inner(X, U, V):
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        raise EigenvalueFloorViolation("base point is not positive definite")
    A = np.linalg.solve(L, np.linalg.solve(L, U).T)
    B = np.linalg.solve(L, np.linalg.solve(L, V).T)
    return float(np.sum(A * B))
