"""
When the data cannot determine the answer
=========================================

Rotations about a single axis leave the extrinsic rotation free about that
axis; pure translation leaves the extrinsic translation free.  The
observability check catches both before any solving.
"""

import numpy as np

from handeye_sdp import ConstraintConfig, InstanceSpec, build_constraints, build_cost, observability_check
from handeye_sdp import random_instance
from handeye_sdp.sdp import certify, extract_primal, solve_dual
from handeye_sdp.synth import degenerate_trajectory, derive_egomotion, random_extrinsic

rng = np.random.default_rng(0)
cases = {
    "rolling-ground drive": random_instance(InstanceSpec(scale_range=(0.2, 5.0)), 0),
    "planar, yaw only": derive_egomotion(degenerate_trajectory("single_axis", 40, rng), random_extrinsic(rng)),
    "pure translation": derive_egomotion(degenerate_trajectory("pure_translation", 40, rng), random_extrinsic(rng)),
}

for name, data in cases.items():
    rep = observability_check(data)
    line = f"{name:22s} observable={rep.ok}"
    if not rep.ok:
        # solve anyway (with a pseudo-inverse for the singular translation block)
        cost = build_cost(data, strict=False)
        sol = solve_dual(cost, build_constraints(ConstraintConfig()))
        cert = certify(extract_primal(sol, cost)[0], sol, cost, data)
        line += (f"  rotation nullity {cert.rotation_nullity}, "
                 f"translation nullity {cert.translation_nullity}  ({rep.messages[0]})")
    print(line)
