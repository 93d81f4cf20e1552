"""Full-information baseline: both substates visible to the controller."""

import numpy as np

from .mdp import FiniteMdp, solve_mdp


def encode(model, x_o, x_u):
    """Flat joint index, ``x_o``-major."""
    return x_o * model.n_unobs + x_u


def decode(model, s):
    return divmod(s, model.n_unobs)


def build_full_info(model):
    """Flat MDP on joint states ``s = x_o * |X_u| + x_u``."""
    n = model.n_obs * model.n_unobs
    kernel = model.kernel.reshape(model.n_actions, n, n)
    cost = model.cost.reshape(model.n_actions, n)
    alpha = np.outer(model.alpha_obs, model.alpha_unobs).ravel()
    return FiniteMdp(kernel, cost, model.discount, alpha / alpha.sum())


def solve_full_info(model, tol=1e-8):
    """Optimal full-information values; returns an :class:`~lsimdp.mdp.MdpSolution`.

    ``solution.values`` is over joint states; reshape to ``(n_obs, n_unobs)`` for
    the per-substate table. ``solution.weighted`` is the alpha_o * alpha_u average.
    """
    return solve_mdp(build_full_info(model), tol=tol)


def per_obs_values(model, solution):
    """Full-information values at each ``x_o`` averaged over ``alpha_unobs``."""
    return solution.values.reshape(model.n_obs, model.n_unobs) @ model.alpha_unobs
