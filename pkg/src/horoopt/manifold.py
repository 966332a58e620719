"""Hadamard-manifold contract and the feasible sets ROGD projects onto."""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np


class HadamardManifold(ABC):
    """Complete, simply connected, non-positively curved manifold.

    Implementations provide the metric, ``exp``/``log`` (mutually inverse,
    since geodesics are unique) and the distance, which must agree with
    ``norm(x, log(x, y))``.
    """

    n: int

    @abstractmethod
    def inner(self, x, U, V):
        ...

    @abstractmethod
    def exp(self, x, U):
        ...

    @abstractmethod
    def log(self, x, y):
        ...

    @abstractmethod
    def dist(self, x, y):
        ...

    def norm(self, x, U):
        return math.sqrt(max(self.inner(x, U, U), 0.0))

    def geodesic_point(self, x, y, t):
        """Constant-speed geodesic from ``x`` (t=0) to ``y`` (t=1).

        Parameters outside [0, 1] are rejected; extrapolate with ``exp``.
        """
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"geodesic parameter must lie in [0, 1], got {t}")
        return self.exp(x, t * self.log(x, y))


class FeasibleSet:
    """Base for the decision sets ROGD may project onto."""

    diameter = math.inf

    def contains(self, manifold, x, atol=1e-9):
        raise NotImplementedError

    def project(self, manifold, z):
        raise NotImplementedError


@dataclass(frozen=True)
class WholeManifold(FeasibleSet):
    """No constraint; projection is the identity."""

    def contains(self, manifold, x, atol=1e-9):
        return True

    def project(self, manifold, z):
        return z


@dataclass(frozen=True, eq=False)
class GeodesicBall(FeasibleSet):
    """Closed ball ``{x : d(center, x) <= radius}``.

    Balls are geodesically convex on a Hadamard manifold and the metric
    projection of an outside point lands on the geodesic from the center
    toward it, at distance ``radius``.
    """

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"ball radius must be positive and finite, got {self.radius}")
        object.__setattr__(self, "center", np.array(self.center, dtype=np.float64))

    @property
    def diameter(self):
        return 2.0 * self.radius

    def contains(self, manifold, x, atol=1e-9):
        return manifold.dist(self.center, x) <= self.radius + atol

    def project(self, manifold, z):
        d = manifold.dist(self.center, z)
        if d <= self.radius:
            return z
        return manifold.geodesic_point(self.center, z, self.radius / d)


def _default_manifold(z):
    from .spd import SPD
    return SPD(np.shape(z)[0])


def project(feasible, z, manifold=None):
    """Metric projection of ``z`` onto ``feasible``.

    ``manifold`` defaults to SPD(n) with n read off ``z``.
    """
    if manifold is None:
        manifold = _default_manifold(z)
    return feasible.project(manifold, z)


def geodesic_point(x, y, t, manifold=None):
    if manifold is None:
        manifold = _default_manifold(x)
    return manifold.geodesic_point(x, y, t)
