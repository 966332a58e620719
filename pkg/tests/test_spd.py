import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from horoopt.errors import DimensionMismatch, EigenvalueFloorViolation, ManifoldError, NonFiniteError
from horoopt.spd import (SPD, format_matrix, is_spd, load_matrix, matrix_fn, parse_matrix,
                         random_spd, random_symmetric, save_matrix, spd_dist, spd_exp,
                         spd_geodesic, spd_inner, spd_log, spd_norm, sym_eig)

E = math.e


def bounded_tangent(X, rng, radius):
    U = random_symmetric(X.shape[0], rng)
    return U * (rng.uniform(0.0, radius) / spd_norm(X, U))


def rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


# -- sym_eig ------------------------------------------------------------------

def test_sym_eig_identity():
    w, Q = sym_eig(np.eye(3))
    assert np.allclose(w, [1, 1, 1])


def test_sym_eig_diagonal_is_descending():
    w, Q = sym_eig(np.diag([1.0, 4.0]))
    assert np.allclose(w, [4, 1])
    assert np.allclose(np.abs(Q), [[0, 1], [1, 0]])


def test_sym_eig_two_by_two_by_hand():
    w, Q = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(w, [3, 1], atol=1e-14)
    s = 1 / math.sqrt(2)
    assert abs(abs(Q[:, 0] @ [s, s]) - 1) < 1e-12
    assert abs(abs(Q[:, 1] @ [s, -s]) - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 16), seed=st.integers(0, 2**32 - 1))
def test_sym_eig_reconstructs(n, seed):
    A = random_symmetric(n, np.random.default_rng(seed), scale=3.0)
    w, Q = sym_eig(A)
    assert np.all(np.diff(w) <= 0)
    assert np.linalg.norm(Q @ Q.T - np.eye(n)) <= 1e-10 * n
    assert np.linalg.norm((Q * w) @ Q.T - A) <= 1e-9 * np.linalg.norm(A)


def test_sym_eig_rejects_nonfinite():
    with pytest.raises(NonFiniteError):
        sym_eig(np.array([[1.0, np.nan], [np.nan, 1.0]]))


def test_rejects_asymmetric_and_nonsquare():
    with pytest.raises(ManifoldError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(DimensionMismatch):
        sym_eig(np.ones((2, 3)))


# -- matrix_fn ----------------------------------------------------------------

def test_matrix_fn_examples():
    assert np.array_equal(matrix_fn(np.eye(3), "log"), np.zeros((3, 3)))
    assert np.allclose(matrix_fn(np.diag([4.0, 9.0]), "sqrt"), np.diag([2.0, 3.0]), atol=1e-15)
    assert np.allclose(matrix_fn(np.diag([4.0, 9.0]), "inv_sqrt"), np.diag([1 / 2, 1 / 3]))
    assert np.allclose(matrix_fn(np.diag([4.0, 9.0]), "power", 1.5), np.diag([8.0, 27.0]))


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_log_exp_roundtrip(rng, n):
    for _ in range(20):
        A = random_spd(n, rng, max_cond=1e4)
        assert rel(matrix_fn(matrix_fn(A, "log"), "exp"), A) <= 1e-9


def test_matrix_fn_matches_scipy(rng):
    A = random_spd(6, rng)
    S = random_symmetric(6, rng)
    assert rel(matrix_fn(A, "sqrt"), sla.sqrtm(A).real) < 1e-12
    assert rel(matrix_fn(A, "log"), sla.logm(A).real) < 1e-10
    assert rel(matrix_fn(S, "exp"), sla.expm(S)) < 1e-12
    assert rel(matrix_fn(A, "power", -0.3), sla.fractional_matrix_power(A, -0.3).real) < 1e-10


def test_floor_violation_is_an_error():
    with pytest.raises(EigenvalueFloorViolation):
        matrix_fn(np.diag([1.0, 1e-13]), "log")
    with pytest.raises(EigenvalueFloorViolation):
        matrix_fn(np.diag([1.0, -1.0]), "sqrt")
    # exp has no positivity requirement
    assert np.allclose(matrix_fn(np.diag([0.0, -1.0]), "exp"), np.diag([1.0, 1 / E]))


def test_matrix_fn_rejects_unknown_and_missing_power():
    with pytest.raises(ValueError):
        matrix_fn(np.eye(2), "cbrt")
    with pytest.raises(ValueError):
        matrix_fn(np.eye(2), "power")


def test_outputs_exactly_symmetric(rng):
    X, Y = random_spd(7, rng), random_spd(7, rng)
    U = random_symmetric(7, rng)
    for M in (matrix_fn(X, "sqrt"), spd_exp(X, U), spd_log(X, Y), spd_geodesic(X, Y, 0.3)):
        assert np.array_equal(M, M.T)


# -- inner / exp / log / dist / geodesic -------------------------------------

def test_inner_examples(rng):
    U = random_symmetric(3, rng)
    assert spd_inner(np.eye(3), U, U) == pytest.approx(np.sum(U * U), rel=1e-14)
    assert spd_inner(np.eye(3), np.zeros((3, 3)), U) == 0.0
    assert spd_inner(2 * np.eye(2), np.eye(2), np.eye(2)) == pytest.approx(0.5, abs=1e-15)


def test_inner_matches_trace_formula(rng):
    X = random_spd(5, rng, max_cond=1e3)
    U, V = random_symmetric(5, rng), random_symmetric(5, rng)
    Xi = np.linalg.inv(X)
    assert spd_inner(X, U, V) == pytest.approx(np.trace(Xi @ U @ Xi @ V), rel=1e-10)
    assert spd_inner(X, U, V) == pytest.approx(spd_inner(X, V, U), rel=1e-13)


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        spd_inner(np.eye(2), np.eye(3), np.eye(3))


def test_exp_examples():
    X = np.diag([2.0, 3.0])
    assert np.allclose(spd_exp(X, np.zeros((2, 2))), X, rtol=1e-14)
    assert np.allclose(spd_exp(np.eye(2), np.diag([0.5, -1.0])), np.diag([math.exp(0.5), 1 / E]))


def test_exp_matches_scipy(rng):
    X = random_spd(5, rng)
    U = random_symmetric(5, rng)
    R = sla.sqrtm(X).real
    Ri = np.linalg.inv(R)
    assert rel(spd_exp(X, U), R @ sla.expm(Ri @ U @ Ri) @ R) < 1e-11


def test_exp_distance_is_tangent_norm(rng):
    for _ in range(20):
        X = random_spd(4, rng)
        U = random_symmetric(4, rng)
        U *= rng.uniform(0.1, 1.0) / spd_norm(X, U)
        assert spd_dist(X, spd_exp(X, U)) == pytest.approx(spd_norm(X, U), rel=1e-10)


def test_exp_overflow_reported():
    with pytest.raises(ManifoldError):
        spd_exp(np.eye(2), np.diag([800.0, 0.0]))


def test_log_examples(rng):
    X = random_spd(3, rng)
    assert np.abs(spd_log(X, X)).max() < 1e-13
    assert np.allclose(spd_log(np.eye(2), np.diag([E**2, E**2])), np.diag([2.0, 2.0]), atol=1e-14)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_exp_log_roundtrip(rng, n):
    for _ in range(10):
        X, Y = random_spd(n, rng), random_spd(n, rng)
        assert rel(spd_exp(X, spd_log(X, Y)), Y) <= 1e-8
        U = bounded_tangent(X, rng, 3.0)
        assert rel(spd_log(X, spd_exp(X, U)), U) <= 1e-8


def test_dist_examples(rng):
    X = random_spd(4, rng)
    assert spd_dist(X, X) == pytest.approx(0.0, abs=1e-7)
    assert spd_dist(np.eye(2), np.diag([E**2, 1.0])) == pytest.approx(2.0, rel=1e-14)


def test_dist_affine_invariant(rng):
    X, Y = random_spd(5, rng), random_spd(5, rng)
    A = rng.standard_normal((5, 5))
    d0 = spd_dist(X, Y)
    AX = A @ X @ A.T
    AY = A @ Y @ A.T
    assert spd_dist(0.5 * (AX + AX.T), 0.5 * (AY + AY.T)) == pytest.approx(d0, rel=1e-8)


def test_dist_matches_generalized_eigenvalues(rng):
    # independent route: eigenvalues of the pencil (Y, X)
    X, Y = random_spd(6, rng), random_spd(6, rng)
    lam = sla.eigh(Y, X, eigvals_only=True)
    assert spd_dist(X, Y) == pytest.approx(np.linalg.norm(np.log(lam)), rel=1e-11)


def test_geodesic_examples(rng):
    X, Y = random_spd(3, rng), random_spd(3, rng)
    assert rel(spd_geodesic(X, Y, 0.0), X) < 1e-14
    assert rel(spd_geodesic(X, Y, 1.0), Y) < 1e-13
    assert np.allclose(spd_geodesic(np.eye(2), np.diag([E**4, 1.0]), 0.5), np.diag([E**2, 1.0]))


def test_geodesic_two_routes(rng):
    for _ in range(10):
        X, Y = random_spd(5, rng), random_spd(5, rng)
        t = rng.uniform()
        assert rel(spd_geodesic(X, Y, t), spd_exp(X, t * spd_log(X, Y))) <= 1e-9


def test_geodesic_rejects_out_of_range(rng):
    X, Y = random_spd(2, rng), random_spd(2, rng)
    for t in (-0.1, 1.5):
        with pytest.raises(ValueError):
            spd_geodesic(X, Y, t)


def test_is_spd():
    assert is_spd(np.eye(3))
    assert not is_spd(np.diag([1.0, 0.0]))
    assert not is_spd(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_manifold_class(rng):
    M = SPD(3)
    X, Y = random_spd(3, rng), random_spd(3, rng)
    assert M.dist(X, Y) == pytest.approx(M.norm(X, M.log(X, Y)), rel=1e-12)
    assert np.array_equal(M.identity(), np.eye(3))
    with pytest.raises(DimensionMismatch):
        M.dist(np.eye(2), np.eye(2))


# -- serialization -----------------------------------------------------------

def test_format_matrix_layout():
    text = format_matrix(np.array([[1.0, 0.1], [0.1, 2.5]]))
    assert text == "2\n1 0.10000000000000001\n0.10000000000000001 2.5\n"


def test_matrix_roundtrip_is_exact(rng, tmp_path):
    A = random_spd(5, rng)
    assert np.array_equal(parse_matrix(format_matrix(A)), A)
    save_matrix(tmp_path / "a.txt", A)
    assert np.array_equal(load_matrix(tmp_path / "a.txt"), A)
    assert b"\r" not in (tmp_path / "a.txt").read_bytes()


def test_parse_matrix_errors():
    with pytest.raises(ValueError):
        parse_matrix("")
    with pytest.raises(ValueError):
        parse_matrix("2\n1 2\n")
    with pytest.raises(ValueError):
        parse_matrix("2\n1 2\n3\n")
