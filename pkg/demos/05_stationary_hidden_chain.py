"""An uncontrolled hidden chain started at its stationary law.

The belief never leaves the stationary measure, so the frozen-belief MDP at
b_s is exact and matches the belief-state DP up to its truncation accuracy.
"""

import numpy as np

from lsimdp import solve_belief_dp, stationary_reduction
from lsimdp.builders import uncontrolled_hidden_model

rng = np.random.default_rng(5)
model = uncontrolled_hidden_model(rng, n_obs=3, p_unobs=[[0.8, 0.2], [0.5, 0.5]], n_actions=2, discount=0.6)
sol, b_s = stationary_reduction(model)
dp = solve_belief_dp(model, accuracy=1e-5)
print("stationary law", b_s, "(5/7, 2/7) =", [5 / 7, 2 / 7])
print("reduced values   ", sol.values)
print("belief DP values ", dp.values)
print("max difference   ", float(np.max(np.abs(sol.values - dp.values))))
