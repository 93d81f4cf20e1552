"""Model constructors for tests, demos and property suites."""

from __future__ import annotations

import numpy as np

from .mdp import FiniteMdp
from .model import LsiModel


def random_stochastic(rng, n_a, n, kind="dense"):
    """Array ``[a, n, n]`` of row-stochastic matrices.

    ``kind`` is ``dense`` (Dirichlet rows), ``permutation``, ``identity`` or
    ``rank_one`` (every row equal). The structured kinds keep belief sets finite.
    """
    if kind == "dense":
        return rng.dirichlet(np.ones(n), size=(n_a, n))
    if kind == "identity":
        return np.broadcast_to(np.eye(n), (n_a, n, n)).copy()
    if kind == "permutation":
        return np.stack([np.eye(n)[rng.permutation(n)] for _ in range(n_a)])
    if kind == "rank_one":
        rows = rng.dirichlet(np.ones(n), size=n_a)
        return np.repeat(rows[:, None, :], n, axis=1)
    raise ValueError(f"unknown kind {kind!r}")


def random_factored_model(rng, n_obs, n_unobs, n_actions, discount, unobs_kind="dense", uniform_alpha=False):
    """Factored model with Dirichlet observed kernel and costs in ``[0, 1)``."""
    p_obs = random_stochastic(rng, n_actions, n_obs)
    p_unobs = random_stochastic(rng, n_actions, n_unobs, unobs_kind)
    cost = rng.random((n_actions, n_obs, n_unobs))
    if uniform_alpha:
        a_o, a_u = np.full(n_obs, 1 / n_obs), np.full(n_unobs, 1 / n_unobs)
    else:
        a_o, a_u = rng.dirichlet(np.ones(n_obs)), rng.dirichlet(np.ones(n_unobs))
    return LsiModel.from_factors(p_obs, p_unobs, cost, discount, a_o, a_u)


def random_family(seed, count, max_obs=4, max_unobs=4, max_actions=3, discounts=(0.3, 0.5, 0.9)):
    """Yield ``count`` random factored models cycling through ``discounts``.

    Hidden kernels alternate between dense and structured kinds so that part of
    the family has finitely many reachable beliefs.
    """
    rng = np.random.default_rng(seed)
    kinds = ("dense", "permutation", "identity", "rank_one")
    for i in range(count):
        yield random_factored_model(
            rng,
            int(rng.integers(1, max_obs + 1)),
            int(rng.integers(1, max_unobs + 1)),
            int(rng.integers(1, max_actions + 1)),
            discounts[i % len(discounts)],
            unobs_kind=kinds[i % len(kinds)],
        )


def deterministic_hidden_model(rng, g, n_unobs, n_actions, discount):
    """Joint model where the hidden substate is always ``g[x_o]``.

    Transitions first move ``x_o`` by a Dirichlet kernel, then set
    ``x_u' = g[x_o']``. ``alpha_unobs`` is a point mass at ``g[x_o]`` only when
    ``alpha_obs`` is too, so callers should use a point-mass ``alpha_obs``.
    """
    g = np.asarray(g, dtype=int)
    n_obs = len(g)
    p_obs = random_stochastic(rng, n_actions, n_obs)
    kernel = np.zeros((n_actions, n_obs, n_unobs, n_obs, n_unobs))
    for xo2 in range(n_obs):
        kernel[:, :, :, xo2, g[xo2]] = p_obs[:, :, None, xo2]
    cost = rng.random((n_actions, n_obs, n_unobs))
    x0 = int(rng.integers(n_obs))
    a_o = np.zeros(n_obs)
    a_o[x0] = 1.0
    a_u = np.zeros(n_unobs)
    a_u[g[x0]] = 1.0
    return LsiModel(kernel, cost, discount, a_o, a_u)


def uncontrolled_hidden_model(rng, n_obs, p_unobs, n_actions, discount):
    """Factored model whose hidden chain ``p_unobs`` ignores the action and starts stationary."""
    from .approx import stationary_distribution

    p_unobs = np.asarray(p_unobs, dtype=float)
    n_unobs = p_unobs.shape[0]
    b_s = stationary_distribution(p_unobs)
    p_obs = random_stochastic(rng, n_actions, n_obs)
    cost = rng.random((n_actions, n_obs, n_unobs))
    a_o = rng.dirichlet(np.ones(n_obs))
    return LsiModel.from_factors(p_obs, np.broadcast_to(p_unobs, (n_actions, n_unobs, n_unobs)), cost, discount, a_o, b_s)


def hidden_blind_cost_model(rng, n_obs, n_unobs, n_actions, discount):
    """Factored model whose cost does not depend on the hidden substate."""
    base = random_factored_model(rng, n_obs, n_unobs, n_actions, discount)
    cost = np.repeat(rng.random((n_actions, n_obs, 1)), n_unobs, axis=2)
    f = base.factors
    return LsiModel.from_factors(f.p_obs, f.p_unobs, cost, discount, base.alpha_obs, base.alpha_unobs)


def random_mdp(rng, n_states, n_actions, discount):
    """Plain finite MDP with Dirichlet kernel and unit-interval costs."""
    return FiniteMdp(
        rng.dirichlet(np.ones(n_states), size=(n_actions, n_states)),
        rng.random((n_actions, n_states)),
        discount,
        rng.dirichlet(np.ones(n_states)),
    )
