"""
Egomotion datasets and the quadratic-form hand-eye cost.

The stacked state is ``x = [t (3), alpha (1), r (9)]`` with ``r = vec(R)``
(column-major).  The rotation-only homogenized state is ``r~ = [r (9), y (1)]``.
In known-scale mode the alpha slot carries the homogenizing variable ``y``
(fixed to 1), which is how the constant camera translation term enters
the quadratic form.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .geometry import RigidTransform, is_rotation, rotation_to_axis_angle, vec

# Index layout of the full state x.
T_SLICE = slice(0, 3)
ALPHA_INDEX = 3
R_SLICE = slice(4, 13)
# Index layout of the homogenized rotation state r~.
Y_INDEX = 9

COND_LIMIT = 1e12


class UnderExcitedError(ValueError):
    """The translation/scale block of the cost is singular or ill-conditioned."""


@dataclass(frozen=True)
class GroundTruth:
    rotation: np.ndarray
    translation: np.ndarray
    scale: float = 1.0


@dataclass(frozen=True)
class EgomotionDataset:
    """
    Paired relative motions of sensor ``a`` and sensor ``b``.

    ``Ra[k], ta[k]`` is the motion ``T_{a_k a_{k+1}}``; likewise for ``b``.
    When ``scale_known`` is false, the ``b`` translations are only known up to
    the unknown factor ``alpha`` (``alpha * tb`` is metric).
    """

    Ra: np.ndarray
    ta: np.ndarray
    Rb: np.ndarray
    tb: np.ndarray
    scale_known: bool = False
    ground_truth: GroundTruth | None = None

    def __post_init__(self):
        for name, shape in (("Ra", (3, 3)), ("ta", (3,)), ("Rb", (3, 3)), ("tb", (3,))):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != len(shape) + 1 or arr.shape[1:] != shape:
                raise ValueError(f"{name} must have shape (T, {', '.join(map(str, shape))})")
            object.__setattr__(self, name, arr)
        if not (len(self.Ra) == len(self.ta) == len(self.Rb) == len(self.tb)):
            raise ValueError("sensor a and sensor b sequences differ in length")
        if len(self.Ra) < 1:
            raise ValueError("dataset needs at least one motion pair")
        for R in (*self.Ra, *self.Rb):
            if not is_rotation(R, tol=1e-8):
                raise ValueError("dataset contains a matrix that is not a rotation")

    @classmethod
    def from_transforms(cls, motions_a: Sequence[RigidTransform], motions_b: Sequence[RigidTransform],
                        scale_known: bool = False, ground_truth: GroundTruth | None = None):
        if len(motions_a) != len(motions_b):
            raise ValueError("sensor a and sensor b sequences differ in length")
        return cls(
            Ra=np.array([m.rotation for m in motions_a]).reshape(-1, 3, 3),
            ta=np.array([m.translation for m in motions_a]).reshape(-1, 3),
            Rb=np.array([m.rotation for m in motions_b]).reshape(-1, 3, 3),
            tb=np.array([m.translation for m in motions_b]).reshape(-1, 3),
            scale_known=scale_known,
            ground_truth=ground_truth,
        )

    def __len__(self) -> int:
        return len(self.Ra)

    @property
    def motions_a(self) -> list[RigidTransform]:
        return [RigidTransform(R, t) for R, t in zip(self.Ra, self.ta)]

    @property
    def motions_b(self) -> list[RigidTransform]:
        return [RigidTransform(R, t) for R, t in zip(self.Rb, self.tb)]

    def with_scale_known(self, scale_known: bool) -> "EgomotionDataset":
        return replace(self, scale_known=scale_known)


@dataclass(frozen=True)
class CostMatrices:
    """
    Quadratic cost ``x^T Q x`` and its Schur reduction.

    ``Q`` is always 13x13 in the ``[t, alpha|y, r]`` layout.  ``Q_ta`` is the
    block eliminated by the Schur complement: 4x4 over ``[t, alpha]`` in
    unknown-scale mode, 3x3 over ``t`` when the scale is known.
    ``Q_homog`` is the 10x10 cost over ``r~ = [r, y]`` used by the SDP; with
    unknown scale it is ``Q_reduced`` padded with a zero row and column.
    """

    Q: np.ndarray
    Q_ta: np.ndarray
    Q_ta_r: np.ndarray
    Q_r: np.ndarray
    Q_reduced: np.ndarray
    Q_homog: np.ndarray
    scale_known: bool
    Q_ta_inv: np.ndarray = field(repr=False)


def _measurement_blocks(Ra, ta, Rb, tb):
    """Per-step residual matrices M_R (9x13) and M_t (3x13), vectorized over steps."""
    T = len(Ra)
    I3 = np.eye(3)
    M_R = np.zeros((T, 9, 13))
    M_t = np.zeros((T, 3, 13))
    for k in range(T):
        M_R[k, :, R_SLICE] = np.kron(Ra[k].T, I3) - np.kron(I3, Rb[k])
        M_t[k, :, T_SLICE] = I3 - Rb[k]
        M_t[k, :, ALPHA_INDEX] = -tb[k]
        M_t[k, :, R_SLICE] = np.kron(ta[k].reshape(1, 3), I3)
    return M_R, M_t


def build_cost(dataset: EgomotionDataset, strict: bool = True) -> CostMatrices:
    """
    Assemble ``Q`` and its Schur complement over the rotation variables.

    With ``strict=False`` an ill-conditioned translation block is handled with
    a pseudo-inverse instead of raising; this is only meant for studying
    degenerate (unobservable) datasets.
    """
    M_R, M_t = _measurement_blocks(dataset.Ra, dataset.ta, dataset.Rb, dataset.tb)
    Q = np.einsum("kij,kil->jl", M_R, M_R) + np.einsum("kij,kil->jl", M_t, M_t)
    Q = 0.5 * (Q + Q.T)

    n_el = 3 if dataset.scale_known else 4
    Q_ta = Q[:n_el, :n_el]
    Q_ta_r = Q[:n_el, n_el:]
    Q_r = Q[n_el:, n_el:]

    cond = np.linalg.cond(Q_ta)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        if strict:
            raise UnderExcitedError(
                f"translation/scale block is ill-conditioned (cond={cond:.3g}); "
                "the motions do not excite all translation directions")
        Q_ta_inv = np.linalg.pinv(Q_ta, rcond=1e-12, hermitian=True)
    else:
        Q_ta_inv = np.linalg.inv(Q_ta)

    Q_reduced = Q_r - Q_ta_r.T @ Q_ta_inv @ Q_ta_r
    Q_reduced = 0.5 * (Q_reduced + Q_reduced.T)

    Q_homog = np.zeros((10, 10))
    if dataset.scale_known:
        # reduced state is [y, r]; reorder to [r, y]
        perm = np.r_[1:10, 0]
        Q_reduced = Q_reduced[np.ix_(perm, perm)]
        Q_homog[:] = Q_reduced
    else:
        Q_homog[:9, :9] = Q_reduced

    return CostMatrices(Q=Q, Q_ta=Q_ta, Q_ta_r=Q_ta_r, Q_r=Q_r, Q_reduced=Q_reduced,
                        Q_homog=Q_homog, scale_known=dataset.scale_known, Q_ta_inv=Q_ta_inv)


def stack_state(R, t, alpha, scale_known: bool = False) -> np.ndarray:
    """Full state ``[t, alpha, vec(R)]``; alpha is replaced by 1 when the scale is known."""
    x = np.empty(13)
    x[T_SLICE] = t
    x[ALPHA_INDEX] = 1.0 if scale_known else alpha
    x[R_SLICE] = vec(R)
    return x


def quadratic_cost(cost: CostMatrices, R, t, alpha=None) -> float:
    x = stack_state(R, t, alpha, cost.scale_known)
    return float(x @ cost.Q @ x)


def evaluate_cost_residual(dataset: EgomotionDataset, R, t, alpha=None) -> float:
    """Sum of squared rotation and translation residuals of ``AX = XB``."""
    R = np.asarray(R, dtype=float)
    t = np.asarray(t, dtype=float).reshape(3)
    if dataset.scale_known or alpha is None:
        alpha = 1.0
    rot_res = R @ dataset.Ra - dataset.Rb @ R
    trans_res = (dataset.ta @ R.T + t - dataset.Rb @ t - alpha * dataset.tb)
    return float(np.sum(rot_res**2) + np.sum(trans_res**2))


def _rest_state(cost: CostMatrices, r) -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(9)
    return np.r_[1.0, r] if cost.scale_known else r


def recover_translation_scale(cost: CostMatrices, r) -> tuple[np.ndarray, float | None]:
    """
    Minimizer of the full cost over translation (and scale) for fixed ``r``.

    Returns ``(t, alpha)``; ``alpha`` is ``None`` in known-scale mode.
    """
    sol = -cost.Q_ta_inv @ cost.Q_ta_r @ _rest_state(cost, r)
    if cost.scale_known:
        return sol[:3], None
    return sol[:3], float(sol[3])


def reduced_cost(cost: CostMatrices, r) -> float:
    r = np.asarray(r, dtype=float).reshape(9)
    if cost.scale_known:
        rt = np.r_[r, 1.0]
        return float(rt @ cost.Q_reduced @ rt)
    return float(r @ cost.Q_reduced @ r)


def schur_consistency_check(cost: CostMatrices, r) -> tuple[float, float]:
    """Reduced cost ``r^T Q~ r`` and the full cost at the recovered (t, alpha)."""
    r = np.asarray(r, dtype=float).reshape(9)
    t, alpha = recover_translation_scale(cost, r)
    x = np.empty(13)
    x[T_SLICE] = t
    x[ALPHA_INDEX] = 1.0 if cost.scale_known else alpha
    x[R_SLICE] = r
    return reduced_cost(cost, r), float(x @ cost.Q @ x)


# ---------------------------------------------------------------------------
# observability

ANGLE_TOL = 1e-3
AXIS_TOL = 1e-2
RANK_TOL = 1e-6


@dataclass
class ObservabilityReport:
    ok: bool
    best_pair: tuple[int, int] | None
    axis_angle_between: float
    span_margin: float
    messages: list[str] = field(default_factory=list)


def observability_check(dataset: EgomotionDataset, R_reference=None,
                        angle_tol: float = ANGLE_TOL, axis_tol: float = AXIS_TOL,
                        rank_tol: float = RANK_TOL) -> ObservabilityReport:
    """
    Search for a pair of motions that makes the calibration observable.

    A pair (i, j) qualifies when both camera rotations exceed ``angle_tol``,
    their axes (as lines) differ by more than ``axis_tol`` and the 6x4 matrix
    ``[[I - Rb_i, R ta_i], [I - Rb_j, R ta_j]]`` has full column rank, i.e.
    its smallest singular value exceeds ``rank_tol * sigma_max``.

    ``R_reference`` is the extrinsic rotation at which the span condition is
    evaluated; the true rotation is unknown before calibration, so callers
    pass ground truth, a current estimate, or (default) the identity.
    """
    R = np.eye(3) if R_reference is None else np.asarray(R_reference, dtype=float)
    messages = []
    axes, angles = [], []
    for Rb in dataset.Rb:
        axis, angle = rotation_to_axis_angle(Rb)
        axes.append(axis)
        angles.append(angle)
    axes = np.array(axes)
    angles = np.array(angles)
    rotating = np.flatnonzero(angles > angle_tol)
    if len(rotating) < 2:
        messages.append(f"only {len(rotating)} motion(s) rotate by more than {angle_tol} rad")
        return ObservabilityReport(False, None, 0.0, 0.0, messages)

    Rta = dataset.ta @ R.T
    I3 = np.eye(3)
    best = None  # (relative margin, pair, axis separation, margin)
    max_sep = 0.0
    for ii, i in enumerate(rotating):
        for j in rotating[ii + 1:]:
            sep = float(np.arccos(np.clip(abs(axes[i] @ axes[j]), 0.0, 1.0)))
            max_sep = max(max_sep, sep)
            if sep <= axis_tol:
                continue
            M = np.block([[I3 - dataset.Rb[i], Rta[i][:, None]],
                          [I3 - dataset.Rb[j], Rta[j][:, None]]])
            s = np.linalg.svd(M, compute_uv=False)
            rel = s[-1] / s[0] if s[0] > 0 else 0.0
            if best is None or rel > best[0]:
                best = (rel, (int(i), int(j)), sep, float(s[-1]), float(s[0]))
    if best is None:
        messages.append(f"all rotation axes lie within {axis_tol} rad of each other "
                        f"(largest separation {max_sep:.3g} rad)")
        return ObservabilityReport(False, None, max_sep, 0.0, messages)

    rel, pair, sep, margin, smax = best
    ok = margin > rank_tol * smax
    if not ok:
        messages.append("translations lie in the span of the rotation columns for every "
                        "pair with distinct axes (span condition fails)")
    return ObservabilityReport(ok, pair, sep, margin, messages)
