"""
Dense primal-dual interior-point method for small semidefinite programs.

Solves the standard-form pair

    primal:  min  <C, X>    s.t.  <F_i, X> = b_i,  X >= 0
    dual:    max  b^T y     s.t.  S = C - sum_i y_i F_i >= 0

with the HKM search direction and Mehrotra predictor-corrector steps.
Written for the tiny fixed-size problems in this package (n = 10, m <= 22);
everything is dense and nothing is cached between solves.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np


class SolverError(RuntimeError):
    """The interior-point iteration failed to converge."""

    def __init__(self, message: str, stats: "SolverStats | None" = None):
        super().__init__(message)
        self.stats = stats


@dataclass
class SolverStats:
    iterations: int
    runtime: float
    termination: str
    primal_objective: float = float("nan")
    dual_objective: float = float("nan")
    relative_gap: float = float("nan")
    primal_infeasibility: float = float("nan")
    dual_infeasibility: float = float("nan")


@dataclass
class SDPResult:
    X: np.ndarray
    y: np.ndarray
    S: np.ndarray
    stats: SolverStats


def _sym(A):
    return 0.5 * (A + A.T)


def _max_step(X, dX):
    """Largest a in (0, inf] with X + a dX PSD (X must be positive definite)."""
    L = np.linalg.cholesky(X)
    Li = np.linalg.inv(L)
    lam = np.linalg.eigvalsh(_sym(Li @ dX @ Li.T))
    lmin = lam[0]
    return np.inf if lmin >= 0 else -1.0 / lmin


def _robust_cholesky(M):
    """Cholesky factor of a PSD matrix, adding tiny diagonal jitter if needed."""
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-15 * max(np.trace(M), 1e-300)
    for _ in range(6):
        try:
            return np.linalg.cholesky(M + jitter * np.eye(len(M)))
        except np.linalg.LinAlgError:
            jitter *= 100
    raise np.linalg.LinAlgError("Schur complement is not positive definite")


def _independent_constraints(F, b, tol=1e-10):
    """Replace a possibly dependent constraint family by an orthogonal basis of its span."""
    m, n, _ = F.shape
    G = F.reshape(m, n * n)
    U, s, Vt = np.linalg.svd(G, full_matrices=False)
    rank = int(np.sum(s > tol * s[0]))
    Ur = U[:, :rank]
    B = (s[:rank, None] * Vt[:rank]).reshape(rank, n, n)
    B = 0.5 * (B + B.transpose(0, 2, 1))
    beta = Ur.T @ b
    if np.linalg.norm(Ur @ beta - b) > 1e-9 * (1 + np.linalg.norm(b)):
        raise SolverError("dependent constraints have inconsistent right-hand sides")
    return B, beta, Ur


def solve_sdp(C, F, b, max_iterations: int = 100, tol: float = 1e-10,
              step_fraction: float = 0.98) -> SDPResult:
    """
    Solve a dense standard-form SDP.

    ``F`` has shape ``(m, n, n)`` and may contain linearly dependent
    constraints as long as they are consistent; the returned ``y`` is the
    minimum-norm multiplier vector in the original indexing.
    """
    start = time.perf_counter()
    C = _sym(np.asarray(C, dtype=float))
    F = np.asarray(F, dtype=float)
    b = np.asarray(b, dtype=float)
    n = C.shape[0]
    B, beta, Ur = _independent_constraints(F, b)
    m = len(B)

    def A_op(X):
        return np.einsum("kij,ij->k", B, X)

    def At_op(y):
        return np.einsum("k,kij->ij", y, B)

    normB = np.linalg.norm(B.reshape(m, -1), axis=1)
    xi = max(10.0, np.sqrt(n), max(n * (1 + abs(beta[k])) / (1 + normB[k]) for k in range(m)))
    eta = max(10.0, np.sqrt(n), np.linalg.norm(C), normB.max())
    X = xi * np.eye(n)
    S = eta * np.eye(n)
    y = np.zeros(m)

    normb = 1.0 + np.linalg.norm(beta)
    normC = 1.0 + np.linalg.norm(C)
    reason = "max_iterations"
    it = 0
    stats = None
    best = None    # (merit, X, y, S, stats): late iterates can lose accuracy to rounding
    for it in range(1, max_iterations + 1):
        rp = beta - A_op(X)
        Rd = C - S - At_op(y)
        mu = np.sum(X * S) / n
        pobj = np.sum(C * X)
        dobj = beta @ y
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / normb
        dinf = np.linalg.norm(Rd) / normC
        stats = SolverStats(it - 1, 0.0, "", pobj, dobj, gap, pinf, dinf)
        if gap <= tol and pinf <= tol and dinf <= tol:
            reason = "converged"
            break
        merit = max(gap, pinf, dinf)
        if best is None or merit < best[0]:
            best = (merit, X, y, S, stats)

        try:
            Lx = np.linalg.cholesky(X)
            Ls = np.linalg.cholesky(S)
            Lsi = np.linalg.inv(Ls)
            Sinv = _sym(Lsi.T @ Lsi)
            # M_ab = tr(F_a X F_b S^-1) = <G_a, G_b> with G_a = Ls^-1 F_a Lx,
            # built as a Gram matrix so it stays PSD in floating point
            G = np.einsum("ij,kjl,lm->kim", Lsi, B, Lx).reshape(m, -1)
            M = G @ G.T
            chol = _robust_cholesky(M)
        except np.linalg.LinAlgError:
            reason = "numerical_failure"
            break

        def direction(sigma, corr):
            G = sigma * mu * Sinv - X
            if corr is not None:
                G = G - _sym(corr @ Sinv)
            rhs = rp - A_op(G) + A_op(X @ Rd @ Sinv)
            dy = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
            dS = Rd - At_op(dy)
            dX = G - _sym(X @ dS @ Sinv)
            return dX, dy, dS

        # predictor
        dXa, dya, dSa = direction(0.0, None)
        ap = min(1.0, step_fraction * _max_step(X, dXa))
        ad = min(1.0, step_fraction * _max_step(S, dSa))
        mu_aff = np.sum((X + ap * dXa) * (S + ad * dSa)) / n
        sigma = min(1.0, (mu_aff / mu) ** 3)
        # corrector
        dX, dy, dS = direction(sigma, dXa @ dSa)
        try:
            ap = min(1.0, step_fraction * _max_step(X, dX))
            ad = min(1.0, step_fraction * _max_step(S, dS))
        except np.linalg.LinAlgError:
            reason = "numerical_failure"
            break
        if max(ap, ad) < 1e-10:
            reason = "stalled"
            break
        X = _sym(X + ap * dX)
        y = y + ad * dy
        S = _sym(S + ad * dS)

    runtime = time.perf_counter() - start
    if stats is None:
        stats = SolverStats(it, runtime, reason)
    stats.runtime = runtime
    stats.iterations = it if reason != "converged" else stats.iterations
    stats.termination = reason
    if reason != "converged":
        if best is None:
            raise SolverError(f"interior-point method did not start ({reason})", stats)
        _, X, y, S, stats = best
        stats.runtime = runtime
        stats.iterations = it
        stats.termination = reason
        # accept a stalled iterate only if it is already accurate to sqrt(tol)
        loose = np.sqrt(tol)
        if not (stats.relative_gap <= loose and stats.primal_infeasibility <= loose
                and stats.dual_infeasibility <= loose):
            raise SolverError(f"interior-point method did not converge ({reason})", stats)
        stats.termination = f"{reason}_near_optimal"
    return SDPResult(X=X, y=Ur @ y, S=S, stats=stats)
