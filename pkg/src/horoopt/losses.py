"""Per-round losses on SPD(n): Tyler terms and squared-distance terms."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ManifoldError
from .spd import as_symmetric, spd_dist, spd_log, spd_norm


@dataclass(frozen=True, eq=False)
class Tyler:
    """``f(S) = log(a^T S^-1 a)`` for a nonzero sample vector ``a``."""

    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64).reshape(-1)
        if not np.isfinite(a).all():
            raise ManifoldError("Tyler sample has non-finite entries")
        if not np.any(a):
            raise ManifoldError("Tyler sample must be nonzero")
        object.__setattr__(self, "a", a)

    @property
    def n(self):
        return self.a.shape[0]

    def quad(self, S):
        """``s = a^T S^-1 a``."""
        S = as_symmetric(S, "Sigma")
        if S.shape[0] != self.n:
            raise DimensionMismatch(f"sample has length {self.n}, point is {S.shape[0]}x{S.shape[0]}")
        return float(self.a @ np.linalg.solve(S, self.a))

    def value(self, S):
        return math.log(self.quad(S))

    def grad(self, S):
        # S (-S^-1 a a^T S^-1 / s) S collapses to a rank-one matrix
        return np.outer(self.a, self.a) / -self.quad(S)


@dataclass(frozen=True, eq=False)
class Frechet:
    """``f(S) = d(S, Y)^2 / 2`` for a sample ``Y`` in SPD(n)."""

    Y: np.ndarray

    def __post_init__(self):
        Y = as_symmetric(self.Y, "Y")
        w = np.linalg.eigvalsh(Y)
        if not w[0] > 0:
            raise ManifoldError("Frechet sample must be positive definite")
        object.__setattr__(self, "Y", Y)

    @property
    def n(self):
        return self.Y.shape[0]

    def value(self, S):
        return 0.5 * spd_dist(S, self.Y) ** 2

    def grad(self, S):
        return -spd_log(S, self.Y)


LossTerm = Tyler | Frechet


def loss_value(term, S):
    return term.value(S)


def loss_grad(term, S):
    """Riemannian gradient of ``term`` at ``S`` (ambient symmetric form)."""
    return term.grad(S)


def grad_norm(term, S):
    """``||grad f(S)||_S`` under the affine-invariant metric."""
    return spd_norm(S, term.grad(S))
