"""Numerical certificates for the convexity machinery on SPD(n).

Busemann functions, horospherical convexity margins, Stewart's inequality
and the Hadamard cosine law, each returned as a signed margin
(left-hand side minus right-hand side) so callers pick the tolerance.

Busemann values come from the truncated limit ``b(t) = d(gamma(t), x) - t``
along the ray, doubling ``t`` until the decrement drops below ``tol``. For
large ``t`` the ray point has eigenvalues like ``exp(t)``, so ``b(t)`` is not
evaluated by forming ``gamma(t)``. Instead the problem is rotated so the ray
is diagonal; the distance then only needs the log-eigenvalues of the graded
matrix ``E M E`` with ``E = diag(exp(t h / 2))``. Indices whose grading
exponents are far apart (``t * gap > _SPLIT``) decouple through a block
LDL^T factorization, up to a relative error of order ``exp(-_SPLIT)``;
within a block the eigenvalues are computed directly, in extended precision
when the block itself is strongly graded.
"""

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import ConvergenceError
from .spd import matrix_fn, spd_dist, spd_exp, spd_geodesic, spd_inner, spd_log, spd_norm

_SPLIT = 40.0      # t * gap beyond which grading blocks are treated as decoupled
_DIRECT = 8.0      # t * spread up to which float64 eigenvalues are trusted
_HORIZON_CAP = 2.0 ** 40


@dataclass
class BusemannEval:
    value: float
    horizon_used: float
    convergence_gap: float
    partials: list = field(default_factory=list, repr=False)


@dataclass
class CertificateMargin:
    margin: float
    scale: float = 1.0
    inputs: dict = field(default_factory=dict, repr=False)


class _Ray:
    """The unit-speed ray ``t -> Exp_p(-t u)`` seen from a fixed point ``x``."""

    def __init__(self, p, u, x):
        Sp_inv = matrix_fn(p, "inv_sqrt")
        W = Sp_inv @ (-u) @ Sp_inv
        w, Q = np.linalg.eigh(0.5 * (W + W.T))
        A = Q.T @ Sp_inv
        M = A @ x @ A.T
        h = -w
        order = np.argsort(-h, kind="stable")
        self.h = h[order]
        self.M = 0.5 * (M + M.T)[np.ix_(order, order)]
        # |h| = 1 up to rounding; measuring the excess against t |h| keeps
        # that rounding from being amplified by t^2 at long horizons
        self.speed = math.sqrt(float(np.sum(self.h ** 2)))

    def _blocks(self, t):
        gaps = np.diff(self.h) * -t
        cuts = np.flatnonzero(gaps > _SPLIT) + 1
        return np.split(np.arange(len(self.h)), cuts)

    def excess(self, t):
        """``b(t) = d(gamma(t), x) - t``."""
        S = self.M
        h = self.h
        acc = 0.0
        offset = 0
        for idx in self._blocks(t):
            k = len(idx)
            D = S[:k, :k]
            if k < S.shape[0]:
                R = S[k:, :k]
                S = S[k:, k:] - R @ np.linalg.solve(D, R.T)
            hb = h[offset:offset + k]
            offset += k
            hbar = float(np.mean(hb))
            delta = hb - hbar
            m = _graded_logeig(D, delta, t)
            acc += 2.0 * t * hbar * float(np.sum(m)) + float(np.sum(m * m)) \
                - t * t * float(np.sum(delta * delta))
        ct = self.speed * t
        d = math.sqrt(max(ct * ct + acc, 0.0))
        return acc / (d + ct)


def _graded_logeig(D, delta, t):
    """Log-eigenvalues of ``diag(e^{t delta/2}) D diag(e^{t delta/2})``."""
    spread = t * (float(delta.max()) - float(delta.min())) if len(delta) > 1 else 0.0
    if spread <= _DIRECT:
        e = np.exp(0.5 * t * delta)
        G = (D * e[:, None]) * e[None, :]
        return np.log(np.linalg.eigvalsh(0.5 * (G + G.T)))
    dps = int(spread / math.log(10)) + 30
    k = len(delta)
    with mpmath.workdps(dps):
        e = [mpmath.exp(mpmath.mpf(t) * mpmath.mpf(float(di)) / 2) for di in delta]
        G = mpmath.matrix(k, k)
        for i in range(k):
            for j in range(i, k):
                G[i, j] = G[j, i] = mpmath.mpf(float(D[i, j])) * e[i] * e[j]
        ev = mpmath.eigsy(G, eigvals_only=True)
        return np.array([float(mpmath.log(ev[i])) for i in range(k)])


def busemann(p, v, x, tol=1e-6):
    """Scaled Busemann function ``B_{p,v}(x) = ||v||_p B_gamma(x)``.

    ``gamma(t) = Exp_p(-t v / ||v||_p)`` is the unit-speed ray leaving ``p``
    in direction ``-v``. The limit is approximated from above by
    ``b(t) = d(gamma(t), x) - t``, with ``t`` doubling from
    ``max(1, d(p, x))`` until the scaled decrement drops below ``tol``.
    """
    nv = spd_norm(p, v)
    if not (nv > 0.0 and math.isfinite(nv)):
        raise ValueError("Busemann direction must be a nonzero finite tangent vector")
    if not tol > 0:
        raise ValueError("tol must be positive")
    ray = _Ray(np.asarray(p, dtype=float), np.asarray(v, dtype=float) / nv,
               np.asarray(x, dtype=float))
    t0 = max(1.0, spd_dist(p, x))
    t = t0
    b = ray.excess(t)
    partials = [nv * b]
    while True:
        t2 = 2.0 * t
        if t2 > _HORIZON_CAP * t0:
            raise ConvergenceError(
                f"Busemann limit not resolved to {tol:g} by horizon {t:g} "
                f"(last decrement {partials[-2] - partials[-1]:.3e})")
        b2 = ray.excess(t2)
        partials.append(nv * b2)
        gap = nv * (b - b2)
        if abs(gap) < tol:
            return BusemannEval(value=nv * b2, horizon_used=t2,
                                convergence_gap=max(gap, 0.0), partials=partials)
        t, b = t2, b2


def _grad_busemann(f, y, x, tol):
    v = f.grad(y)
    if spd_norm(y, v) == 0.0:
        return 0.0
    return busemann(y, v, x, tol).value


def check_h_convexity(f, y, x, tol=1e-6):
    """Margin of ``f(x) - f(y) >= B_{y, grad f(y)}(x)``."""
    lhs = f.value(x) - f.value(y)
    return CertificateMargin(lhs - _grad_busemann(f, y, x, tol),
                             inputs={"y": y, "x": x, "tol": tol})


def check_strong_h_convexity(f, mu, y, x):
    """Margin of ``f(x) - f(y) >= -|v|^2/(2 mu) + mu/2 d(Exp_y(-v/mu), x)^2``
    with ``v = grad f(y)``."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    v = f.grad(y)
    anchor = spd_exp(y, -v / mu)
    q = -spd_inner(y, v, v) / (2 * mu) + 0.5 * mu * spd_dist(anchor, x) ** 2
    return CertificateMargin(f.value(x) - f.value(y) - q,
                             inputs={"y": y, "x": x, "mu": mu})


def check_stewart(a, b, c, s):
    """Margin of ``|ab|^2 |pc| + |ac|^2 |pb| >= (|pa|^2 + |pb||pc|) |bc|``
    for ``p`` at fraction ``s`` along the geodesic from ``b`` to ``c``."""
    p = spd_geodesic(b, c, s)
    ab, ac, bc = spd_dist(a, b), spd_dist(a, c), spd_dist(b, c)
    pa, pb, pc = spd_dist(p, a), spd_dist(p, b), spd_dist(p, c)
    margin = ab ** 2 * pc + ac ** 2 * pb - (pa ** 2 + pb * pc) * bc
    return CertificateMargin(margin, scale=max(ab, ac, bc, pa),
                             inputs={"a": a, "b": b, "c": c, "s": s, "p": p})


def check_cosine_law(a, p, b):
    """Margin of ``|ab|^2 >= |pb|^2 + |pa|^2 - 2 <Log_p b, Log_p a>_p``."""
    ab, pa, pb = spd_dist(a, b), spd_dist(p, a), spd_dist(p, b)
    cross = spd_inner(p, spd_log(p, b), spd_log(p, a))
    margin = ab ** 2 - pb ** 2 - pa ** 2 + 2.0 * cross
    return CertificateMargin(margin, scale=max(ab, pa, pb),
                             inputs={"a": a, "p": p, "b": b})


def check_busemann_descent(x, w, y, tol=1e-6):
    """Margin of ``-B_{x,w}(y) <= (|x~x|^2 + |yx|^2 - |yx~|^2) / 2`` with
    ``x~ = Exp_x(-w)``."""
    xt = spd_exp(x, -np.asarray(w))
    rhs = 0.5 * (spd_dist(xt, x) ** 2 + spd_dist(y, x) ** 2 - spd_dist(y, xt) ** 2)
    return CertificateMargin(rhs + busemann(x, w, y, tol).value,
                             inputs={"x": x, "w": w, "y": y, "tol": tol})
