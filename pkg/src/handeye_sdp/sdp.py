"""
Lagrangian dual of the homogenized rotation QCQP, primal recovery and
optimality certification.

The dual is ``max nu_y  s.t.  Z(nu) = Q_homog + sum_k nu_k A_k - nu_y A_y >= 0``.
Any rank-one minimizer ``r~ = [vec(R), y]`` of the Lagrangian lies in the
nullspace of ``Z(nu*)``; a zero duality gap at such a point certifies it as
the global optimum.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .constraints import ConstraintConfig, ConstraintSet, build_constraints
from .geometry import nearest_rotation, unvec
from .problem import (
    CostMatrices,
    EgomotionDataset,
    Y_INDEX,
    build_cost,
    evaluate_cost_residual,
    recover_translation_scale,
    reduced_cost,
)
from .solver import SolverError, SolverStats, solve_sdp

log = logging.getLogger(__name__)


class ExtractionError(RuntimeError):
    pass


class CalibrationError(RuntimeError):
    """Pipeline failure tagged with the stage that failed."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 100
    objective_tolerance: float = 1e-10
    psd_tolerance: float = 1e-8
    backend: str = "ipm"                 # "ipm" or "cvxpy"
    nullspace_tolerance: float = 1e-3
    orthogonality_tolerance: float = 1e-3
    gap_tolerance: float = 1e-4
    y_tolerance: float = 1e-6


@dataclass
class DualSolution:
    nu: np.ndarray            # [nu_1 .. nu_m, nu_y]
    objective: float
    Z: np.ndarray
    stats: SolverStats

    @property
    def nu_y(self) -> float:
        return float(self.nu[-1])


@dataclass
class Candidate:
    r_tilde: np.ndarray       # nullspace vector, normalized so y = 1
    R_raw: np.ndarray         # reshaped vec part before projection
    rotation: np.ndarray      # nearest proper rotation
    translation: np.ndarray
    scale: float | None
    orthogonality_residual: float
    primal_cost: float
    y: float                  # y component of the unit nullspace vector


@dataclass
class Certificate:
    certified: bool
    relative_gap: float
    nullspace_dim: int
    min_singular_value: float
    orthogonality_residual: float
    rotation_nullity: int = 0
    translation_nullity: int = 0
    reasons: list[str] = field(default_factory=list)

    @property
    def ambiguous(self) -> bool:
        """More than one minimizer: several rotations, or a free translation/scale direction."""
        return self.rotation_nullity > 1 or self.translation_nullity > 0


@dataclass
class ExtrinsicEstimate:
    rotation: np.ndarray
    translation: np.ndarray
    scale: float | None
    primal_cost: float
    certificate: Certificate | None
    method: str
    dual: DualSolution | None = None
    solve_time: float = 0.0

    @property
    def certified(self) -> bool:
        return self.certificate is not None and self.certificate.certified


def assemble_Z(cost: CostMatrices, cset: ConstraintSet, nu) -> np.ndarray:
    nu = np.asarray(nu, dtype=float)
    if nu.shape != (cset.num_multipliers,):
        raise ValueError(f"expected {cset.num_multipliers} multipliers, got {nu.shape}")
    Z = cost.Q_homog + np.einsum("k,kij->ij", nu[:-1], cset.matrices) - nu[-1] * cset.homogenizer
    return 0.5 * (Z + Z.T)


def _restore_psd(cset: ConstraintSet, nu: np.ndarray, Z: np.ndarray):
    """
    Shift ``Z`` by ``delta * I`` to remove a small negative eigenvalue.

    Adding ``delta`` to each diagonal orthogonality multiplier of one family
    contributes ``delta * diag(I_9, -3)``; lowering ``nu_y`` by ``4 delta``
    completes the identity, so the dual objective stays a valid lower bound.
    """
    lam_min = np.linalg.eigvalsh(Z)[0]
    if lam_min >= 0:
        return nu, Z
    delta = -lam_min
    prefix = "row" if cset.config.row_orth else "col"
    nu = nu.copy()
    for a in (1, 2, 3):
        nu[cset.labels.index(f"{prefix}({a},{a})")] += delta
    nu[-1] -= 4.0 * delta
    return nu, Z + delta * np.eye(10)


def _solve_ipm(cost, cset, opts):
    scale = np.linalg.norm(cost.Q_homog, 2)
    scale = scale if scale > 0 else 1.0
    F = np.concatenate([-cset.matrices, cset.homogenizer[None]])
    b = np.zeros(len(F))
    b[-1] = 1.0
    res = solve_sdp(cost.Q_homog / scale, F, b, max_iterations=opts.max_iterations,
                    tol=opts.objective_tolerance)
    return res.y * scale, res.stats


def _solve_cvxpy(cost, cset, opts):
    import cvxpy as cp

    m = len(cset)
    start = time.perf_counter()
    nu = cp.Variable(m)
    nu_y = cp.Variable()
    Z = cost.Q_homog - nu_y * cset.homogenizer
    for k in range(m):
        Z = Z + nu[k] * cset.matrices[k]
    prob = cp.Problem(cp.Maximize(nu_y), [0.5 * (Z + Z.T) >> 0])
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.SolverError as exc:
        raise SolverError(str(exc)) from exc
    stats = SolverStats(iterations=prob.solver_stats.num_iters or 0,
                        runtime=time.perf_counter() - start, termination=prob.status,
                        dual_objective=prob.value)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise SolverError(f"conic solver returned status {prob.status}", stats)
    return np.r_[nu.value, nu_y.value], stats


def solve_dual(cost: CostMatrices, cset: ConstraintSet, opts: SolverOptions = SolverOptions()) -> DualSolution:
    """Maximize ``nu_y`` subject to ``Z(nu) >= 0``."""
    if opts.backend == "ipm":
        nu, stats = _solve_ipm(cost, cset, opts)
    elif opts.backend == "cvxpy":
        nu, stats = _solve_cvxpy(cost, cset, opts)
    else:
        raise ValueError(f"unknown solver backend {opts.backend!r}")
    Z = assemble_Z(cost, cset, nu)
    nu, Z = _restore_psd(cset, nu, Z)
    lam_min = np.linalg.eigvalsh(Z)[0]
    if lam_min < -opts.psd_tolerance * max(1.0, np.linalg.norm(Z)):
        raise SolverError(f"dual solution is not PSD (lambda_min={lam_min:.3g})", stats)
    return DualSolution(nu=nu, objective=float(nu[-1]), Z=Z, stats=stats)


def _nullspace(Z: np.ndarray, tol: float):
    _, s, Vt = np.linalg.svd(Z)
    return s, Vt[s < tol]


def _make_candidate(cost: CostMatrices, r_tilde: np.ndarray, y_unit: float) -> Candidate:
    r = r_tilde[:9]
    R_raw = unvec(r)
    orth = float(np.linalg.norm(R_raw.T @ R_raw - np.eye(3)))
    try:
        R = nearest_rotation(R_raw)
    except ValueError:
        R = np.full((3, 3), np.nan)
    if np.all(np.isfinite(R)):
        t, alpha = recover_translation_scale(cost, R.reshape(-1, order="F"))
        primal = reduced_cost(cost, R.reshape(-1, order="F"))
    else:
        t, alpha, primal = np.full(3, np.nan), None, np.inf
    return Candidate(r_tilde=r_tilde, R_raw=R_raw, rotation=R, translation=t, scale=alpha,
                     orthogonality_residual=orth, primal_cost=primal, y=y_unit)


def candidate_from_rotation(cost: CostMatrices, R) -> Candidate:
    """Wrap an externally supplied rotation as a candidate (for certifying other estimates)."""
    R = np.asarray(R, dtype=float)
    return _make_candidate(cost, np.r_[R.reshape(-1, order="F"), 1.0], 1.0)


def _homogenizer_decoupled(null: np.ndarray, tol: float = 1e-6) -> bool:
    """True when e_y lies in the nullspace, i.e. y does not interact with r."""
    if len(null) == 0:
        return False
    proj = null.T @ (null @ np.eye(10)[Y_INDEX])
    return np.linalg.norm(proj - np.eye(10)[Y_INDEX]) < tol ** 0.5


def extract_primal(sol: DualSolution, cost: CostMatrices,
                   opts: SolverOptions = SolverOptions()) -> list[Candidate]:
    """
    Candidate minimizers from the right-singular vectors of ``Z`` whose
    singular values fall below ``opts.nullspace_tolerance``.

    Each vector is divided by its ``y`` component.  Without handedness
    constraints ``y`` never couples to ``r`` and the nullspace contains ``e_y``
    itself; the remaining ``r``-only directions are then scaled so that
    ``|r|^2 = 3`` (the trace of ``R^T R = y^2 I``) and tried with both signs.
    """
    s, null = _nullspace(sol.Z, opts.nullspace_tolerance)
    if len(null) == 0:
        raise ExtractionError(f"Z has no singular value below {opts.nullspace_tolerance} "
                              f"(smallest is {s[-1]:.3g})")
    cands = []
    for v in null:
        if abs(v[Y_INDEX]) >= opts.y_tolerance:
            cands.append(_make_candidate(cost, v / v[Y_INDEX], abs(v[Y_INDEX])))
    if _homogenizer_decoupled(null):
        ey = np.eye(10)[Y_INDEX]
        W = null - np.outer(null @ ey, ey)
        U, sw, _ = np.linalg.svd(W.T, full_matrices=False)
        for w in U[:, sw > 0.5].T:
            r = np.sqrt(3.0) * w[:9] / np.linalg.norm(w[:9])
            for sign in (1.0, -1.0):
                cands.append(_make_candidate(cost, np.r_[sign * r, 1.0], 0.0))
    if not cands:
        raise ExtractionError(f"every nullspace vector has |y| < {opts.y_tolerance}")
    return cands


def _rank_key(c: Candidate, opts: SolverOptions):
    proper = np.linalg.det(c.R_raw) > 0
    usable = c.orthogonality_residual < opts.orthogonality_tolerance and proper
    return (not usable, c.primal_cost, -c.y)


def rotation_nullity(sol: DualSolution, opts: SolverOptions = SolverOptions()) -> int:
    """Nullspace dimension of ``Z`` not explained by a decoupled homogenizer."""
    _, null = _nullspace(sol.Z, opts.nullspace_tolerance)
    return len(null) - int(_homogenizer_decoupled(null))


def translation_nullity(cost: CostMatrices, rtol: float = 1e-10) -> int:
    """Dimension of the kernel of the eliminated translation (and scale) block."""
    lam = np.linalg.eigvalsh(cost.Q_ta)
    return int(np.sum(lam <= rtol * max(lam[-1], 1e-300)))


def certify(candidate: Candidate, sol: DualSolution, cost: CostMatrices,
            dataset: EgomotionDataset | None = None,
            opts: SolverOptions = SolverOptions()) -> Certificate:
    """
    Check the optimality criteria: a usable nullspace candidate, an
    orthogonal proper rotation and a relative duality gap within tolerance.
    ``Z`` itself must also be PSD, otherwise ``nu_y`` is not a lower bound.
    """
    s, null = _nullspace(sol.Z, opts.nullspace_tolerance)
    reasons = []
    if len(null) == 0:
        reasons.append("nullspace: no singular value below tolerance")
    nullity = len(null) - int(_homogenizer_decoupled(null))
    lam_min = np.linalg.eigvalsh(sol.Z)[0]
    if lam_min < -opts.psd_tolerance * max(1.0, np.linalg.norm(sol.Z)):
        reasons.append(f"dual feasibility: Z has eigenvalue {lam_min:.3g}")
    orth = candidate.orthogonality_residual
    if not orth < opts.orthogonality_tolerance:
        reasons.append(f"orthogonality: |R^T R - I|_F = {orth:.3g}")
    if not np.linalg.det(candidate.R_raw) > 0:
        reasons.append("orthogonality: extracted matrix is a reflection")
    if not np.all(np.isfinite(candidate.rotation)):
        primal = np.inf
    elif dataset is not None:
        primal = evaluate_cost_residual(dataset, candidate.rotation, candidate.translation,
                                        candidate.scale)
    else:
        primal = candidate.primal_cost
    gap = abs(primal - sol.nu_y) / max(1.0, primal)
    if not gap <= opts.gap_tolerance:
        reasons.append(f"duality gap: relative gap {gap:.3g} exceeds {opts.gap_tolerance:.3g}")
    return Certificate(certified=not reasons, relative_gap=float(gap), nullspace_dim=len(null),
                       min_singular_value=float(s[-1]), orthogonality_residual=orth,
                       rotation_nullity=nullity, translation_nullity=translation_nullity(cost),
                       reasons=reasons)


def calibrate(dataset: EgomotionDataset, config: ConstraintConfig = ConstraintConfig(),
              opts: SolverOptions = SolverOptions()) -> ExtrinsicEstimate:
    """
    Certifiably optimal extrinsic calibration.

    Returns the best certified candidate, or the cheapest uncertified one
    with its failed criteria listed in the certificate.
    """
    start = time.perf_counter()
    try:
        cost = build_cost(dataset)
    except ValueError as exc:
        raise CalibrationError("cost", str(exc)) from exc
    cset = build_constraints(config)
    try:
        sol = solve_dual(cost, cset, opts)
    except SolverError as exc:
        raise CalibrationError("solve", str(exc)) from exc
    try:
        cands = extract_primal(sol, cost, opts)
    except ExtractionError as exc:
        raise CalibrationError("extract", str(exc)) from exc

    scored = [(c, certify(c, sol, cost, dataset, opts)) for c in cands]
    scored.sort(key=lambda cc: (not cc[1].certified,) + _rank_key(cc[0], opts))
    best, cert = scored[0]
    if not cert.certified:
        log.info("calibration not certified: %s", "; ".join(cert.reasons))
    primal = evaluate_cost_residual(dataset, best.rotation, best.translation, best.scale)
    return ExtrinsicEstimate(rotation=best.rotation, translation=best.translation,
                             scale=best.scale, primal_cost=primal, certificate=cert,
                             method="dual_sdp", dual=sol, solve_time=time.perf_counter() - start)
