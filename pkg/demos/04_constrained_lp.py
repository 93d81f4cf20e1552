"""The equal-mass occupation LP and what it really restricts.

Asking y(x_o, x_u, a) to be equal across x_u is stronger than asking the
policy to ignore x_u: the discounted mass of every hidden state must match.
On the bundled example only the always-0 policy satisfies it.
"""

import pathlib

import numpy as np

from lsimdp import Policy, audit_policy, load_model, solve_constrained_dual, solve_constrained_primal

model = load_model(pathlib.Path(__file__).with_name("sec6.json"))
cd = solve_constrained_dual(model)
print("occupation [x_o, x_u, a]:\n", np.round(cd.occupation, 5))
print("policy", cd.policy.table, "objective", round(cd.objective, 6))
print("aggregated primal:", solve_constrained_primal(model).to_dict())

print("\nall four blind deterministic policies on the true system:")
for a0 in range(2):
    for a1 in range(2):
        print(f"  d = ({a0}, {a1}): {audit_policy(model, Policy.deterministic([a0, a1])):.6f}")
