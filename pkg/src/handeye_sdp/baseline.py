"""Linear least-squares comparison method (no optimality guarantee)."""

from __future__ import annotations

import time

import numpy as np

from .geometry import nearest_rotation, unvec, vec
from .problem import EgomotionDataset, build_cost, evaluate_cost_residual, recover_translation_scale
from .sdp import ExtrinsicEstimate


class AmbiguousMinimizerError(ValueError):
    """The unconstrained minimizer is not unique up to scale."""


def calibrate_linear(dataset: EgomotionDataset) -> ExtrinsicEstimate:
    """
    Minimize ``r^T Q~ r`` over unit vectors, project onto SO(3), then solve
    for translation and scale in closed form.

    The sign of the eigenvector is resolved by keeping whichever projection
    has the lower full cost (ties go to the positive-scale candidate).
    """
    start = time.perf_counter()
    cost = build_cost(dataset)
    Qr = cost.Q_reduced
    if dataset.scale_known:
        # eliminate y as well: the affine minimizer is the 9x9 system with y = 1
        A, b = Qr[:9, :9], Qr[:9, 9]
        lam = np.linalg.eigvalsh(A)
        if lam[0] <= 1e-10 * max(lam[-1], 1e-300):
            raise AmbiguousMinimizerError("reduced cost is singular over the rotation entries")
        r0 = -np.linalg.solve(A, b)
    else:
        lam, V = np.linalg.eigh(Qr)
        if lam[1] - lam[0] < 1e-10 * max(lam[-1], 1e-300):
            raise AmbiguousMinimizerError("smallest eigenvalue of the reduced cost is repeated")
        r0 = V[:, 0]

    best = None
    for sign in (1.0, -1.0):
        R = nearest_rotation(unvec(sign * r0))
        t, alpha = recover_translation_scale(cost, vec(R))
        J = evaluate_cost_residual(dataset, R, t, alpha)
        key = (J, 0 if (alpha is None or alpha > 0) else 1)
        if best is None or key < best[0]:
            best = (key, R, t, alpha, J)
        if dataset.scale_known:
            break
    _, R, t, alpha, J = best
    return ExtrinsicEstimate(rotation=R, translation=t, scale=alpha, primal_cost=J,
                             certificate=None, method="linear",
                             solve_time=time.perf_counter() - start)
