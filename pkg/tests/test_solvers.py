import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from sparsecorrupt import dictionaries as dl
from sparsecorrupt.errors import (GuardExceededError, InfeasibleError, NotFoundError,
                                  PreconditionError, SingularSystemError)
from sparsecorrupt.solvers import (basis_pursuit, brute_force_p0, brute_force_p0_ne, l1_norm,
                                   numerical_rank, omp, pinv_solve)


def _lp_l1(D, z):
    """Real BP via the standard split x = u - v, u, v >= 0."""
    M, N = D.shape
    res = linprog(np.ones(2 * N), A_eq=np.hstack([D, -D]), b_eq=z, bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def test_pinv_solve_matches_normal_equations():
    rng = np.random.default_rng(0)
    D = rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
    z = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    rep = pinv_solve(D, z)
    ref = np.linalg.solve(D.conj().T @ D, D.conj().T @ z)
    assert np.allclose(rep.solution, ref)


def test_pinv_solve_rank_deficient():
    D = np.array([[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]])
    with pytest.raises(SingularSystemError):
        pinv_solve(D, np.ones(3))
    with pytest.raises(SingularSystemError):
        pinv_solve(np.ones((2, 3)), np.ones(2))
    assert numerical_rank(D) == 1


@pytest.mark.parametrize("k", [1, 3, 5])
def test_omp_onb_exact(k):
    M = 16
    H = dl.build_hadamard(M)
    rng = np.random.default_rng(k)
    x = np.zeros(M)
    x[rng.choice(M, k, replace=False)] = rng.standard_normal(k)
    rep = omp(H, H.entries @ x, k)
    assert np.allclose(rep.solution, x, atol=1e-12)
    assert rep.converged and rep.iterations == k


def test_omp_tie_break_lowest_index():
    D = np.eye(3)
    rep = omp(D, np.array([1.0, 1.0, 0.0]), 1)
    assert rep.support == (0,)


def test_omp_bad_k():
    with pytest.raises(PreconditionError):
        omp(np.eye(3), np.ones(3), 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 6))
def test_omp_residual_history_nonincreasing(seed, k):
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((6, 10))
    rep = omp(D, rng.standard_normal(6), k)
    h = np.array(rep.history)
    assert np.all(np.diff(h) <= 1e-12 * h[0])


def test_bp_minimal_example():
    D = np.hstack([np.eye(2), np.eye(2)])
    rep = basis_pursuit(D, np.array([1.0, 0.0]))
    assert rep.converged
    assert l1_norm(rep.solution) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 6), st.integers(1, 8))
def test_bp_matches_lp_oracle(seed, M, extra):
    rng = np.random.default_rng(seed)
    N = M + extra
    D = rng.standard_normal((M, N))
    z = rng.standard_normal(M)
    rep = basis_pursuit(D, z)
    opt = _lp_l1(D, z)
    assert rep.converged
    assert np.linalg.norm(D @ rep.solution.real - z) <= 1e-8 * max(1, np.linalg.norm(z))
    assert l1_norm(rep.solution) == pytest.approx(opt, rel=1e-6)


def test_bp_complex_recovers_sparse():
    M = 16
    F, I = dl.build_dft(M), dl.build_identity(M)
    D = dl.concat(F, I)
    w = np.zeros(2 * M, complex)
    w[[1, 20]] = [1 + 1j, -0.5]
    rep = basis_pursuit(D, D.entries @ w)
    assert rep.converged
    assert np.allclose(rep.solution, w, atol=1e-7)


def test_bp_infeasible():
    D = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(InfeasibleError):
        basis_pursuit(D, np.array([1.0, -1.0]))


def test_bp_zero_measurement():
    rep = basis_pursuit(np.eye(3), np.zeros(3))
    assert rep.converged and not np.any(rep.solution)


def _p0_oracle(D, z, max_k):
    N = D.shape[1]
    for k in range(1, max_k + 1):
        sols = []
        for S in itertools.combinations(range(N), k):
            sub = D[:, S]
            c = np.linalg.lstsq(sub, z, rcond=None)[0]
            if np.linalg.norm(sub @ c - z) <= 1e-9 * np.linalg.norm(z) and np.all(np.abs(c) > 1e-12):
                x = np.zeros(N, complex)
                x[list(S)] = c
                sols.append(x)
        if sols:
            return k, sols
    return None, []


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3))
def test_brute_force_p0_matches_oracle(seed, k):
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((5, 8))
    x = np.zeros(8)
    x[rng.choice(8, k, replace=False)] = rng.standard_normal(k)
    z = D @ x
    res = brute_force_p0(D, z, max_k=4)
    kk, sols = _p0_oracle(D, z, 4)
    assert res.sparsity == kk
    assert res.unique == (len(sols) == 1)
    assert np.allclose(res.solution, x, atol=1e-8)


def test_brute_force_p0_detects_non_uniqueness():
    D = np.hstack([np.eye(2), np.eye(2)])
    res = brute_force_p0(D, np.array([1.0, 0.0]), max_k=2)
    assert res.sparsity == 1 and not res.unique and len(res.alternatives) == 2


def test_brute_force_p0_guard_and_not_found():
    with pytest.raises(GuardExceededError):
        brute_force_p0(np.random.default_rng(0).standard_normal((4, 40)), np.ones(4), 4, guard=1000)
    with pytest.raises(NotFoundError):
        brute_force_p0(np.eye(4), np.ones(4), max_k=2)


def test_brute_force_p0_ne_toy():
    M = 8
    F, I = dl.build_dft(M).entries, dl.build_identity(M).entries
    x = np.zeros(M, complex)
    x[3] = 1.0
    e = np.zeros(M, complex)
    e[5] = 2.0
    res = brute_force_p0_ne(F, I, F @ x + I @ e, ne=1, max_nx=2)
    assert res.sparsity == 1 and res.unique
    assert res.error_support == (5,)
    assert np.allclose(res.solution_x, x)
