"""Run the belief-feedback controller on the true chain.

The DP table is keyed by quantized beliefs. The simulator tracks the belief
alongside the sampled path and looks up an action at every step; beyond the
DP horizon there are no keys, so the run stops there.
"""

import pathlib

from lsimdp import SimConfig, belief_policy_action, load_model, simulate_both, solve_belief_dp

model = load_model(pathlib.Path(__file__).with_name("sec6.json"))
dp = solve_belief_dp(model, accuracy=1e-4)

for x_o in range(model.n_obs):
    print(f"x_o={x_o}, b0={model.alpha_unobs}: action {belief_policy_action(dp, x_o, model.alpha_unobs)}")

true_cost, belief_cost = simulate_both(model, dp, SimConfig(episodes=20_000, horizon=dp.horizon_used, seed=1))
print(f"DP value            {dp.weighted:.5f}")
print(f"sampled hidden cost {true_cost.mean:.5f} +- {true_cost.std_error:.5f}")
print(f"belief-averaged     {belief_cost.mean:.5f} +- {belief_cost.std_error:.5f}")
