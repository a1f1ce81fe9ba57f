"""
What a certificate actually checks
==================================

The dual problem gives a lower bound ``nu_y`` on the best achievable cost.
A candidate whose cost matches that bound cannot be beaten, whatever local
minima the non-convex problem has.  This demo looks at the pieces.
"""

import numpy as np

from handeye_sdp import InstanceSpec, NoiseConfig, build_constraints, build_cost, random_instance
from handeye_sdp.sdp import candidate_from_rotation, certify, extract_primal, solve_dual
from handeye_sdp.geometry import random_rotation

data = random_instance(InstanceSpec(noise=NoiseConfig(translation_sigma=2.0, rotation_sigma=0.02),
                                    scale_range=(0.2, 5.0)), seed=3)
cost = build_cost(data)
cset = build_constraints()
sol = solve_dual(cost, cset)

# %%
# The dual matrix Z is PSD with (numerically) one zero singular value.  Its
# null vector, divided by the homogenizing entry, is vec(R).
sv = np.linalg.svd(sol.Z, compute_uv=False)
print("singular values of Z:", np.array2string(sv, precision=3))

cand = extract_primal(sol, cost)[0]
cert = certify(cand, sol, cost, data)
print(f"lower bound {sol.objective:.6f}, candidate cost {cand.primal_cost:.6f}, "
      f"gap {cert.relative_gap:.1e} -> certified {cert.certified}")

# %%
# A random rotation is feasible for the original problem, so its cost is an
# upper bound too, but a loose one, and the gap test rejects it.
other = candidate_from_rotation(cost, random_rotation(np.random.default_rng(0)))
bad = certify(other, sol, cost, data)
print(f"random rotation: cost {other.primal_cost:.3f}, certified {bad.certified}")
for reason in bad.reasons:
    print("  -", reason)
