import math
import warnings

import numpy as np
import pytest

from horoopt.errors import ConvergenceError, RankDeficientError
from horoopt.losses import Frechet, Tyler
from horoopt.manifold import GeodesicBall
from horoopt.oracle import compute_regret, karcher_mean, offline_minimize, tyler_fixed_point
from horoopt.rogd import InverseSqrt, run_rogd
from horoopt.spd import (matrix_fn, random_spd, random_symmetric, spd_dist, spd_exp,
                         spd_geodesic, spd_norm)

TOL = 1e-9


def test_offline_single_frechet_is_sample(rng):
    Y = random_spd(3, rng)
    res = offline_minimize([Frechet(Y)], tol=TOL)
    assert res.converged
    assert spd_dist(res.point, Y) <= 10 * TOL


def test_offline_two_frechet_is_midpoint(rng):
    Y1, Y2 = random_spd(4, rng), random_spd(4, rng)
    res = offline_minimize([Frechet(Y1), Frechet(Y2)], tol=TOL)
    assert spd_dist(res.point, spd_geodesic(Y1, Y2, 0.5)) <= 10 * TOL


def test_offline_commuting_family_is_log_euclidean_mean(rng):
    Q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    logs = [np.diag(rng.uniform(-2, 2, size=3)) for _ in range(6)]
    Ys = [Q @ matrix_fn(L, "exp") @ Q.T for L in logs]
    Ys = [0.5 * (Y + Y.T) for Y in Ys]
    expected = Q @ matrix_fn(sum(logs) / 6, "exp") @ Q.T
    res = offline_minimize([Frechet(Y) for Y in Ys], tol=TOL)
    assert spd_dist(res.point, 0.5 * (expected + expected.T)) <= 10 * TOL


def test_offline_stationary_and_best(rng):
    Ys = [random_spd(4, rng) for _ in range(30)]
    losses = [Frechet(Y) for Y in Ys]
    res = offline_minimize(losses, tol=TOL)
    G = -sum(f.grad(res.point) for f in losses) / 30
    assert spd_norm(res.point, G) <= 10 * TOL
    for Z in (Ys[0], random_spd(4, rng)):
        assert sum(f.value(Z) for f in losses) / 30 >= res.objective


def test_offline_ball_constrained_tyler(rng):
    A = rng.standard_normal((200, 3)) * [4.0, 1.0, 0.25]
    losses = [Tyler(a) for a in A]
    ball = GeodesicBall(np.eye(3), 1.0)
    res = offline_minimize(losses, ball, tol=TOL)
    assert res.converged
    assert spd_dist(np.eye(3), res.point) <= 1.0 + 1e-9
    # sampled feasible candidates cannot beat it
    for _ in range(50):
        U = random_symmetric(3, rng)
        Z = spd_exp(np.eye(3), U * rng.uniform(0, 1.0) / spd_norm(np.eye(3), U))
        assert sum(f.value(Z) for f in losses) / 200 >= res.objective - 1e-12


def test_unconstrained_tyler_needs_scale_fix(rng):
    losses = [Tyler(a) for a in rng.standard_normal((20, 2))]
    with pytest.raises(ValueError):
        offline_minimize(losses)


def test_det_normalized_tyler_agrees_with_fixed_point(rng):
    A = rng.standard_normal((400, 3)) @ np.diag([2.0, 1.0, 0.5])
    losses = [Tyler(a) for a in A]
    res = offline_minimize(losses, scale_fix="det", tol=1e-10)
    assert np.linalg.det(res.point) == pytest.approx(1.0, rel=1e-10)
    fp = tyler_fixed_point(A)
    fp = fp / np.linalg.det(fp) ** (1 / 3)
    assert spd_dist(res.point, fp) <= 1e-7


def test_strict_mode_raises(rng):
    Ys = [random_spd(3, rng) for _ in range(5)]
    with pytest.raises(ConvergenceError):
        offline_minimize([Frechet(Y) for Y in Ys], tol=1e-14, max_iters=2, strict=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = offline_minimize([Frechet(Y) for Y in Ys], tol=1e-14, max_iters=2)
    assert not res.converged and caught


def test_karcher_examples(rng):
    Y = random_spd(3, rng)
    assert spd_dist(karcher_mean([Y, Y, Y]), Y) <= 1e-10
    Y2 = random_spd(3, rng)
    assert spd_dist(karcher_mean([Y, Y2]), spd_geodesic(Y, Y2, 0.5)) <= 1e-9


def test_karcher_matches_offline(rng):
    Ys = [random_spd(4, rng) for _ in range(10)]
    tol = 1e-9
    km = karcher_mean(Ys, tol=tol)
    res = offline_minimize([Frechet(Y) for Y in Ys], tol=tol)
    assert spd_dist(km, res.point) <= 10 * tol


def test_karcher_rejects_empty():
    with pytest.raises(ValueError):
        karcher_mean([])


def test_tyler_fixed_point_symmetric_data():
    A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    assert np.abs(tyler_fixed_point(A) - np.eye(2)).max() <= 1e-6


def test_tyler_fixed_point_rank_deficient():
    A = np.outer(np.arange(1.0, 6.0), [1.0, 2.0])
    with pytest.raises(RankDeficientError):
        tyler_fixed_point(A)


def test_tyler_fixed_point_is_consistent(rng):
    n, T = 4, 10_000
    Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    sigma = (Q * [3.0, 1.5, 1.0, 0.5]) @ Q.T
    A = rng.standard_normal((T, n)) @ matrix_fn(sigma, "sqrt")
    est = tyler_fixed_point(A)
    assert np.trace(est) == pytest.approx(n, rel=1e-12)
    assert spd_dist(est, sigma * n / np.trace(sigma)) <= 0.5


def test_compute_regret_bookkeeping(rng):
    A = rng.standard_normal((100, 3))
    losses = [Tyler(a) for a in A]
    ball = GeodesicBall(np.eye(3), 1.0)
    traj = run_rogd(np.eye(3), losses, InverseSqrt(0.5), ball)
    comp = offline_minimize(losses, ball).point
    trace = compute_regret(traj, losses, comp)
    assert np.allclose(np.cumsum(trace.learner_losses - trace.comparator_losses), trace.cum_regret,
                       atol=1e-12)
    assert trace.regret == trace.cum_regret[-1]
    assert np.array_equal(trace.learner_losses, traj.learner_losses)
    # plain iterate lists work too
    assert np.array_equal(compute_regret(traj.iterates[:-1], losses, comp).cum_regret,
                          trace.cum_regret)
    with pytest.raises(ValueError):
        compute_regret(traj.iterates[:50], losses, comp)


def test_comparator_gradient_small_when_unconstrained(rng):
    Ys = [random_spd(3, rng) for _ in range(20)]
    losses = [Frechet(Y) for Y in Ys]
    comp = offline_minimize(losses, tol=TOL).point
    trace = compute_regret([np.eye(3)] * 20, losses, comp)
    assert trace.comparator_grad_norm <= 10 * TOL
