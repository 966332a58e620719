"""Best-in-hindsight comparators and regret bookkeeping."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, EigenvalueFloorViolation, ManifoldError, RankDeficientError
from .losses import Frechet, Tyler
from .manifold import WholeManifold
from .spd import SPD, spd_dist, spd_exp, spd_inner, spd_log

ARMIJO = 1e-4
MAX_STEP = 5.0   # geodesic length cap on a trial step
MIN_ALPHA = 1e-12
EPS = np.finfo(float).eps
NOISE_FACTOR = 1e3   # per-term errors grow with the conditioning of the samples


class _Objective:
    """Average loss ``F(S) / T`` over a fixed list of terms, vectorized per family."""

    def __init__(self, losses):
        if not losses:
            raise ValueError("need at least one loss term")
        self.T = len(losses)
        tyl = [f.a for f in losses if isinstance(f, Tyler)]
        self.A = np.array(tyl) if tyl else None
        self.Ys = [f.Y for f in losses if isinstance(f, Frechet)]
        if len(tyl) + len(self.Ys) != self.T:
            raise TypeError("unsupported loss term type")

    @property
    def has_tyler(self):
        return self.A is not None

    def _tyler_quad(self, S):
        L = np.linalg.cholesky(S)
        Z = np.linalg.solve(L, self.A.T)
        return np.einsum("ij,ij->j", Z, Z)

    def terms(self, S):
        parts = []
        if self.A is not None:
            parts.append(np.log(self._tyler_quad(S)))
        if self.Ys:
            parts.append(np.array([0.5 * spd_dist(S, Y) ** 2 for Y in self.Ys]))
        return np.concatenate(parts)

    def value(self, S):
        return float(np.mean(self.terms(S)))

    def noise(self, S):
        """Generous bound on the rounding error of :meth:`value` at ``S``."""
        return NOISE_FACTOR * EPS * max(float(np.mean(np.abs(self.terms(S)))), 1.0)

    def grad(self, S):
        G = np.zeros_like(S)
        if self.A is not None:
            s = self._tyler_quad(S)
            G -= (self.A.T / s) @ self.A
        for Y in self.Ys:
            G -= spd_log(S, Y)
        G /= self.T
        return 0.5 * (G + G.T)


def _det_normalize(S):
    sign, logdet = np.linalg.slogdet(S)
    return S * math.exp(-logdet / S.shape[0])


@dataclass
class OfflineResult:
    point: np.ndarray
    objective: float          # average loss F(point) / T
    displacement: float       # last gradient-mapping norm
    iterations: int
    converged: bool


def offline_minimize(losses, feasible=None, tol=1e-9, max_iters=5000,
                     initial=None, scale_fix=None, strict=False):
    """Projected Riemannian gradient descent on the cumulative loss.

    Iterates ``S <- P(Exp_S(-alpha grad F(S) / T))`` with halving backtracking
    (Armijo constant 1e-4) and a doubling trial step after each acceptance.
    Stops once the gradient-mapping norm ``d(S, S+) / alpha`` is at most
    ``tol``. Returns the iterate with the lowest objective seen, where values
    within rounding of the best count as ties won by the later iterate.

    Tyler sums are unbounded below without a scale constraint, so an
    unconstrained problem containing Tyler terms needs either a ball or
    ``scale_fix="det"``, which restricts to ``det S = 1``.

    With ``strict=True`` a run that hits ``max_iters`` raises
    :class:`ConvergenceError`; otherwise it warns.
    """
    F = _Objective(list(losses))
    if feasible is None:
        feasible = WholeManifold()
    if scale_fix not in (None, "det"):
        raise ValueError(f"unknown scale_fix {scale_fix!r}")
    unconstrained = isinstance(feasible, WholeManifold)
    if F.has_tyler and unconstrained and scale_fix is None:
        raise ValueError("unconstrained Tyler objective needs scale_fix='det' or a ball")
    n = F.A.shape[1] if F.has_tyler else F.Ys[0].shape[0]
    M = SPD(n)

    def retract(S):
        S = feasible.project(M, S)
        return _det_normalize(S) if scale_fix == "det" else S

    def direction(S):
        G = F.grad(S)
        if scale_fix == "det":
            # drop the component along S, the normal of {det = 1}
            G = G - (np.trace(np.linalg.solve(S, G)) / n) * S
        return G

    if initial is None:
        initial = feasible.center if hasattr(feasible, "center") else np.eye(n)
    S = retract(np.array(initial, dtype=float))
    fS = F.value(S)
    best, fbest = S, fS
    def trial(S, alpha, G=None):
        G = direction(S) if G is None else G
        S_new = retract(spd_exp(S, -alpha * G))
        return S_new, spd_log(S, S_new)

    def mapping_norm(S, step, alpha):
        return math.sqrt(max(spd_inner(S, step, step), 0.0)) / alpha

    alpha = 1.0
    disp = math.inf
    it = 0
    for it in range(1, max_iters + 1):
        G = direction(S)
        gnorm = math.sqrt(max(spd_inner(S, G, G), 0.0))
        if gnorm * alpha > MAX_STEP:
            alpha = MAX_STEP / gnorm
        slack = F.noise(S)
        while True:
            try:
                S_new, step = trial(S, alpha, G)
                f_new = F.value(S_new)
                if abs(f_new - fS) > slack:
                    ok = f_new <= fS + ARMIJO * spd_inner(S, G, step)
                else:
                    # F no longer resolves the change; require the gradient
                    # mapping to shrink instead, which rules out overshoots
                    _, step_next = trial(S_new, alpha)
                    ok = mapping_norm(S_new, step_next, alpha) < mapping_norm(S, step, alpha)
            except (ManifoldError, np.linalg.LinAlgError):
                ok = False
            if ok:
                break
            alpha *= 0.5
            if alpha < MIN_ALPHA:
                break
        if not ok:
            break
        disp = mapping_norm(S, step, alpha)
        S, fS = S_new, f_new
        if fS <= fbest + slack:   # ties within rounding go to the later iterate
            best, fbest = S, min(fS, fbest)
        if disp <= tol:
            break
        alpha = min(2.0 * alpha, 1e3)
    converged = disp <= tol
    if not converged:
        msg = f"offline_minimize stopped after {it} iterations, displacement {disp:.3e}"
        if strict:
            raise ConvergenceError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return OfflineResult(best, fbest, disp, it, converged)


def karcher_mean(points, tol=1e-10, max_iters=1000):
    """Fixed-point iteration ``S <- Exp_S(mean_t Log_S(Y_t))``."""
    Ys = [np.asarray(Y, dtype=float) for Y in points]
    if not Ys:
        raise ValueError("need at least one point")
    S = Ys[0]
    for _ in range(max_iters):
        V = sum(spd_log(S, Y) for Y in Ys) / len(Ys)
        V = 0.5 * (V + V.T)
        if math.sqrt(max(spd_inner(S, V, V), 0.0)) <= tol:
            return S
        S = spd_exp(S, V)
    raise ConvergenceError(f"Karcher mean did not reach tolerance {tol:g} in {max_iters} iterations")


def tyler_fixed_point(samples, tol=1e-10, max_iters=10000):
    """Tyler's scatter estimator, normalized to ``trace = n``.

    Iterates ``S <- (n / T) sum_t a_t a_t^T / (a_t^T S^-1 a_t)`` followed by
    trace renormalization until successive iterates are within ``tol`` in
    geodesic distance.
    """
    A = np.asarray(samples, dtype=float)
    if A.ndim != 2 or A.shape[0] == 0:
        raise ValueError("samples must be a non-empty (T, n) array")
    T, n = A.shape
    if T < n or np.linalg.matrix_rank(A) < n:
        raise RankDeficientError("samples do not span R^n")
    S = np.eye(n)
    for _ in range(max_iters):
        try:
            L = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            raise RankDeficientError("Tyler iterate became singular") from None
        Z = np.linalg.solve(L, A.T)
        s = np.einsum("ij,ij->j", Z, Z)
        S_new = (n / T) * (A.T / s) @ A
        S_new = 0.5 * (S_new + S_new.T)
        S_new *= n / np.trace(S_new)
        try:
            step = spd_dist(S, S_new)
        except EigenvalueFloorViolation:
            raise RankDeficientError("Tyler iterate became singular") from None
        S = S_new
        if step <= tol:
            return S
    raise ConvergenceError(f"Tyler fixed point did not reach tolerance {tol:g}")


@dataclass
class RegretTrace:
    learner_losses: np.ndarray
    comparator_losses: np.ndarray
    cum_regret: np.ndarray
    comparator: np.ndarray
    comparator_grad_norm: float

    @property
    def regret(self):
        return float(self.cum_regret[-1])


def compute_regret(trajectory, losses, comparator):
    """Per-round losses of the learner and of ``comparator``, and their
    running difference ``R_t = sum_{s<=t} f_s(x_s) - f_s(x*)``.

    ``trajectory`` is a :class:`~horoopt.rogd.Trajectory` or a plain
    sequence of iterates ``x_1 .. x_T`` (extra trailing iterates ignored).
    """
    losses = list(losses)
    iterates = getattr(trajectory, "iterates", trajectory)
    if len(iterates) < len(losses) or len(iterates) > len(losses) + 1:
        raise ValueError(f"{len(iterates)} iterates for {len(losses)} losses")
    comparator = np.asarray(comparator, dtype=float)
    learner = np.array([f.value(x) for f, x in zip(losses, iterates)])
    comp = np.array([f.value(comparator) for f in losses])
    cum = np.cumsum(learner - comp)
    G = _Objective(losses).grad(comparator)
    gnorm = math.sqrt(max(spd_inner(comparator, G, G), 0.0))
    return RegretTrace(learner, comp, cum, comparator, gnorm)
