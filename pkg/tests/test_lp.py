import itertools

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from gstep.solver.lp import solve_lp


def test_single_lower_bound():
    r = solve_lp([1.0], sp.csr_matrix((0, 1)), [], [], [3.0], [np.inf])
    assert r.status == "optimal" and r.x[0] == 3.0 and r.objective == 3.0


def test_row_lower_bound():
    r = solve_lp([1.0], [[1.0]], ["G"], [3.0], [0.0], [np.inf])
    assert r.objective == pytest.approx(3.0)
    assert r.duals[0] == pytest.approx(1.0)


def test_degenerate_equalities():
    # three equalities, one redundant, a unique point
    A = [[1.0, 1.0], [1.0, -1.0], [2.0, 0.0]]
    r = solve_lp([1.0, 1.0], A, ["E", "E", "E"], [2.0, 0.0, 2.0], [0.0, 0.0], [np.inf, np.inf])
    assert r.status == "optimal"
    np.testing.assert_allclose(r.x, [1.0, 1.0], atol=1e-9)


def test_infeasible_and_unbounded():
    assert solve_lp([1.0], [[1.0]], ["L"], [-1.0], [0.0], [np.inf]).status == "infeasible"
    assert solve_lp([-1.0], [[1.0]], ["G"], [1.0], [0.0], [np.inf]).status == "unbounded"


def _vertex_oracle(c, A, b, lo, hi):
    """Minimum of c'x over {A x <= b, lo <= x <= hi} in two dimensions by vertex enumeration."""
    H = [(a, bb) for a, bb in zip(A, b)]
    H += [(np.array([-1.0, 0.0]), -lo[0]), (np.array([0.0, -1.0]), -lo[1])]
    H += [(np.array([1.0, 0.0]), hi[0]), (np.array([0.0, 1.0]), hi[1])]
    best = np.inf
    for (a1, b1), (a2, b2) in itertools.combinations(H, 2):
        M = np.array([a1, a2])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, [b1, b2])
        if all(a @ x <= bb + 1e-7 for a, bb in H):
            best = min(best, float(np.dot(c, x)))
    return best


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000))
def test_two_variable_lps_match_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    m = rng.integers(1, 5)
    A = rng.integers(-5, 6, (m, 2)).astype(float)
    b = rng.integers(0, 20, m).astype(float)
    c = rng.integers(-5, 6, 2).astype(float)
    lo, hi = np.zeros(2), np.full(2, 10.0)
    r = solve_lp(c, A, ["L"] * m, b, lo, hi)
    oracle = _vertex_oracle(c, A, b, lo, hi)
    assert r.status == "optimal"  # 0 is always feasible since b >= 0
    assert r.objective == pytest.approx(oracle, abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12), st.integers(1, 10))
def test_random_lps_match_linprog(seed, n, m):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.6)
    senses = rng.choice(["L", "G", "E"], m)
    x0 = rng.uniform(0, 3, n)
    b = A @ x0 + np.where(senses == "L", 1.0, np.where(senses == "G", -1.0, 0.0))
    c = rng.normal(size=n)
    lo = np.zeros(n)
    hi = np.where(rng.random(n) < 0.5, 5.0, np.inf)
    r = solve_lp(c, A, senses, b, lo, hi)
    Aub = np.vstack([A[senses == "L"], -A[senses == "G"]])
    bub = np.concatenate([b[senses == "L"], -b[senses == "G"]])
    ref = linprog(c, A_ub=Aub if len(Aub) else None, b_ub=bub if len(bub) else None,
                  A_eq=A[senses == "E"] if (senses == "E").any() else None,
                  b_eq=b[senses == "E"] if (senses == "E").any() else None,
                  bounds=list(zip(lo, [None if np.isinf(h) else h for h in hi])), method="highs")
    if ref.status == 3:
        assert r.status == "unbounded"
        return
    assert ref.status == 0
    assert r.status == "optimal"
    assert r.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
    act = A @ r.x
    assert np.all(act[senses == "L"] <= b[senses == "L"] + 1e-7)
    assert np.all(act[senses == "G"] >= b[senses == "G"] - 1e-7)
    np.testing.assert_allclose(act[senses == "E"], b[senses == "E"], atol=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_strong_duality(seed):
    rng = np.random.default_rng(seed)
    m, n = 4, 6
    A = rng.uniform(0.1, 2.0, (m, n))
    b = rng.uniform(1.0, 5.0, m)
    c = rng.uniform(0.5, 3.0, n)
    r = solve_lp(c, A, ["G"] * m, b, np.zeros(n), np.full(n, np.inf))
    assert r.status == "optimal"
    assert float(r.duals @ b) == pytest.approx(r.objective, rel=1e-8)
    assert np.all(r.duals >= -1e-9)
    np.testing.assert_allclose(r.reduced_costs, c - A.T @ r.duals, atol=1e-9)
    assert np.all(r.reduced_costs >= -1e-9)


def test_warm_start_reuses_basis():
    A = np.array([[1.0, 2.0, 1.0], [3.0, 1.0, 2.0]])
    c = np.array([-1.0, -1.0, -1.0])
    lo, hi = np.zeros(3), np.full(3, 4.0)
    first = solve_lp(c, A, ["L", "L"], [6.0, 8.0], lo, hi)
    hi2 = hi.copy()
    hi2[0] = 1.0
    warm = solve_lp(c, A, ["L", "L"], [6.0, 8.0], lo, hi2, basis=first.basis)
    cold = solve_lp(c, A, ["L", "L"], [6.0, 8.0], lo, hi2)
    assert warm.objective == pytest.approx(cold.objective, abs=1e-12)
