import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from handeye_sdp.solver import SolverError, solve_sdp


def _sym(rng, n):
    A = rng.normal(size=(n, n))
    return (A + A.T) / 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 10))
def test_trace_constrained_sdp_is_min_eigenvalue(seed, n):
    # min <C, X>  s.t. tr X = 1, X >= 0   has value lambda_min(C)
    C = _sym(np.random.default_rng(seed), n)
    res = solve_sdp(C, np.eye(n)[None], np.array([1.0]))
    lam, V = np.linalg.eigh(C)
    assert res.y[0] == pytest.approx(lam[0], abs=1e-8)
    assert np.linalg.eigvalsh(res.S)[0] > -1e-9
    if lam[1] - lam[0] > 1e-3:
        assert np.allclose(res.X, np.outer(V[:, 0], V[:, 0]), atol=1e-5)


def test_dependent_constraints_are_handled():
    rng = np.random.default_rng(5)
    C = _sym(rng, 5) + 5 * np.eye(5)
    E = np.zeros((5, 5))
    E[0, 0] = 1.0
    F = np.array([np.eye(5), 2 * np.eye(5), E])       # second row duplicates the first
    res = solve_sdp(C, F, np.array([1.0, 2.0, 0.3]))
    assert abs(np.trace(res.X) - 1.0) < 1e-8 and abs(res.X[0, 0] - 0.3) < 1e-8
    S = C - np.einsum("k,kij->ij", res.y, F)
    assert np.allclose(S, res.S, atol=1e-8)


def test_inconsistent_dependent_constraints_raise():
    F = np.array([np.eye(3), 2 * np.eye(3)])
    with pytest.raises(SolverError):
        solve_sdp(np.eye(3), F, np.array([1.0, 1.0]))


def test_iteration_cap_reports_stats():
    rng = np.random.default_rng(1)
    with pytest.raises(SolverError) as info:
        solve_sdp(_sym(rng, 6), np.eye(6)[None], np.array([1.0]), max_iterations=2)
    assert info.value.stats is not None and info.value.stats.iterations >= 1


@pytest.mark.parametrize("seed", range(5))
def test_matches_conic_reference_solver(seed):
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(seed)
    n, m = 6, 4
    X0 = rng.normal(size=(n, n))
    X0 = X0 @ X0.T + np.eye(n)             # strictly feasible primal point
    F = np.array([_sym(rng, n) for _ in range(m)] + [np.eye(n)])
    b = np.einsum("kij,ij->k", F, X0)
    C = _sym(rng, n) + n * np.eye(n)
    res = solve_sdp(C, F, b)
    X = cp.Variable((n, n), symmetric=True)
    prob = cp.Problem(cp.Minimize(cp.trace(C @ X)),
                      [X >> 0] + [cp.trace(F[k] @ X) == b[k] for k in range(m + 1)])
    prob.solve(solver=cp.CLARABEL)
    assert b @ res.y == pytest.approx(prob.value, rel=1e-6)
    assert res.stats.termination == "converged"
