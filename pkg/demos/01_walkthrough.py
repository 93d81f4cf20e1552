"""Solve the bundled 2x2x2 example every way the toolkit knows.

Prints the full-information optimum (a lower bound nobody without x_u can
reach), the frozen-belief policy and its true cost, the belief-state DP
value, and the hidden-state-blind occupation LP.
"""

import pathlib

import numpy as np

from lsimdp import (
    audit_policy,
    load_model,
    solve_belief_dp,
    solve_constrained_dual,
    solve_full_info,
    solve_virtual,
)

model = load_model(pathlib.Path(__file__).with_name("sec6.json"))
np.set_printoptions(precision=5, suppress=True)

full = solve_full_info(model)
print("full information")
print("  values by (x_o, x_u):\n", full.values.reshape(2, 2))
print(f"  weighted {full.weighted:.6f}  (primal LP {full.primal_lp:.6f}, dual LP {full.dual_lp:.6f})")

virt = solve_virtual(model)
print("\nfrozen belief")
print("  values by x_o:", virt.values, " policy:", virt.policy.table)
print(f"  weighted {virt.weighted:.6f}; same policy on the true system {audit_policy(model, virt.policy):.6f}")

dp = solve_belief_dp(model)
print("\nbelief-state DP")
print(f"  horizon {dp.horizon_used}, memo {dp.memo_size}, error bound {dp.error_bound:.2e}")
print("  values by x_o:", dp.values, " root actions:", dp.root_actions)

cd = solve_constrained_dual(model)
print("\nequal-mass occupation LP")
print("  policy:", cd.policy.table, f" objective {cd.objective:.6f}")

# information ordering: more information never costs more
assert full.weighted <= dp.weighted + dp.accuracy <= audit_policy(model, virt.policy) + dp.accuracy
