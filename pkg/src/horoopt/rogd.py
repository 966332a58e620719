"""Riemannian online gradient descent.

Each round observes ``g_t = grad f_t(x_t)``, moves along the exponential map
by ``-eta_t g_t`` and projects back onto the feasible set.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .manifold import WholeManifold
from .spd import SPD


@dataclass(frozen=True)
class Constant:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("step size must be positive")

    def __call__(self, t):
        _check_round(t)
        return self.eta


@dataclass(frozen=True)
class InverseSqrt:
    """``eta_t = eta0 / sqrt(t)``."""

    eta0: float

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError("step size must be positive")

    def __call__(self, t):
        _check_round(t)
        return self.eta0 / math.sqrt(t)


@dataclass(frozen=True)
class Inverse:
    """``eta_t = eta0 / (mu t)``; ``eta0 = 1`` is the strongly convex rate."""

    eta0: float
    mu: float = 1.0

    def __post_init__(self):
        if not (self.eta0 > 0 and self.mu > 0):
            raise ValueError("eta0 and mu must be positive")

    def __call__(self, t):
        _check_round(t)
        return self.eta0 / (self.mu * t)


def _check_round(t):
    if t < 1:
        raise ValueError(f"rounds are numbered from 1, got {t}")


def step_size(schedule, t):
    return schedule(t)


@dataclass
class Trajectory:
    """Iterates ``x_1 .. x_{T+1}`` and per-round diagnostics."""

    iterates: list
    grad_norms: np.ndarray
    step_sizes: np.ndarray
    step_times: np.ndarray
    learner_losses: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def T(self):
        return len(self.step_sizes)


class RoundError(RuntimeError):
    """A manifold error raised during round ``t`` of a run."""

    def __init__(self, t, cause):
        super().__init__(f"round {t}: {cause}")
        self.t = t
        self.cause = cause


def rogd_step(x, g, eta, feasible=None, manifold=None):
    """One update ``P_X(Exp_x(-eta g))``."""
    if manifold is None:
        manifold = SPD(np.shape(x)[0])
    if feasible is None:
        feasible = WholeManifold()
    return feasible.project(manifold, manifold.exp(x, -eta * np.asarray(g)))


def run_rogd(initial, losses, schedule, feasible=None, manifold=None):
    """Run ROGD over an ordered stream of loss terms.

    ``losses`` may be any iterable (including a generator); term ``t`` is
    drawn only after ``x_t`` is fixed and is evaluated only at ``x_t``.
    """
    x = np.array(initial, dtype=np.float64)
    if manifold is None:
        manifold = SPD(x.shape[0])
    if feasible is None:
        feasible = WholeManifold()
    if not feasible.contains(manifold, x):
        raise ValueError("initial point lies outside the feasible set")

    iterates = [x]
    norms, etas, times, values, notes = [], [], [], [], []
    mu = getattr(schedule, "mu", None)
    t = 0
    for t, term in enumerate(losses, start=1):
        t0 = time.perf_counter()
        try:
            eta = schedule(t)
            values.append(term.value(x))
            g = term.grad(x)
            norms.append(manifold.norm(x, g))
            x = rogd_step(x, g, eta, feasible, manifold)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise RoundError(t, exc) from exc
        times.append(time.perf_counter() - t0)
        etas.append(eta)
        iterates.append(x)
        if mu is not None and eta > 1.0 / mu * (1 + 1e-12):
            notes.append(f"round {t}: eta_t={eta:.6g} exceeds 1/mu={1.0 / mu:.6g}")
    if t == 0:
        raise ValueError("loss stream is empty")
    return Trajectory(
        iterates=iterates,
        grad_norms=np.array(norms),
        step_sizes=np.array(etas),
        step_times=np.array(times),
        learner_losses=np.array(values),
        warnings=notes,
    )
