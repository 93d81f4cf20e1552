"""Seeded Monte Carlo simulation of the joint chain.

Each episode draws from its own Philox4x64 stream: the 64-bit seed is the
key and the episode index occupies the top word of the 256-bit counter, so
episode ``e`` sees the same numbers no matter how many episodes run or in
which order. Within an episode the uniforms are laid out as

* ``u[0]``, ``u[1]``: initial ``x_o`` and ``x_u``
* ``u[2 + 2t]``: joint transition at step ``t``
* ``u[3 + 2t]``: action draw at step ``t`` (randomized policies only)

Categorical draws use inverse CDF over index-ascending cumulative sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .belief_dp import BeliefDpReport, belief_policy_action
from .errors import KeyNotCovered
from .mdp import Policy


@dataclass(frozen=True)
class SimConfig:
    episodes: int = 10_000
    horizon: int = None
    seed: int = 0

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass
class SimResult:
    mean: float
    std_error: float
    truncation_bias_bound: float
    episodes_run: int
    horizon: int
    policy_kind: str
    totals: np.ndarray = None

    def to_dict(self):
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "truncation_bias_bound": self.truncation_bias_bound,
            "episodes_run": self.episodes_run,
            "horizon": self.horizon,
            "policy_kind": self.policy_kind,
        }


def default_horizon(model, eps=1e-6):
    """Smallest horizon with ``beta**H * c_max / (1 - beta) <= eps`` (at least 1)."""
    beta, c_max = model.discount, model.c_max
    if beta == 0.0 or c_max == 0.0:
        return 1
    h = math.ceil(math.log(eps * (1 - beta) / c_max) / math.log(beta))
    return max(h, 1)


@dataclass(frozen=True)
class JointPolicy:
    """Stationary policy over joint states ``x_o * |X_u| + x_u`` (full information)."""

    policy: Policy


def policy_kind(policy):
    if isinstance(policy, JointPolicy):
        return "full-information"
    if isinstance(policy, BeliefDpReport):
        return "belief-feedback"
    if isinstance(policy, Policy):
        return "local-stationary"
    return "fixed-action-sequence"


def episode_uniforms(seed, episode, n):
    gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, episode]))
    return gen.random(n)


def _cdf(probs):
    """Cumulative sums with the tail from the last positive entry pinned to 1."""
    cdf = np.cumsum(probs, axis=-1)
    pos = probs > 0
    last = probs.shape[-1] - 1 - np.argmax(pos[..., ::-1], axis=-1)
    idx = np.arange(probs.shape[-1])
    cdf = np.where(idx >= last[..., None], 1.0, np.minimum(cdf, 1.0))
    return cdf


def _draw(cdf_rows, u):
    return np.sum(cdf_rows <= u[:, None], axis=1)


def _run(model, policy, config):
    horizon = config.horizon or default_horizon(model)
    E = config.episodes
    n_o, n_u, n_a = model.n_obs, model.n_unobs, model.n_actions
    beta = model.discount
    kind = policy_kind(policy)
    if kind == "fixed-action-sequence":
        seq = np.asarray(list(policy), dtype=int)
        if len(seq) < horizon:
            raise ValueError(f"action sequence of length {len(seq)} shorter than horizon {horizon}")
        if np.any(seq < 0) or np.any(seq >= n_a):
            raise ValueError("action index out of range")
    elif kind == "local-stationary":
        pol_cdf = _cdf(policy.matrix(n_a))
        if pol_cdf.shape[0] != n_o:
            raise ValueError("local policy must cover every observable substate")
    elif kind == "full-information":
        pol_cdf = _cdf(policy.policy.matrix(n_a))
        if pol_cdf.shape[0] != n_o * n_u:
            raise ValueError("joint policy must cover every joint state")

    u = np.stack([episode_uniforms(config.seed, e, 2 + 2 * horizon) for e in range(E)])
    xo = _draw(np.broadcast_to(_cdf(model.alpha_obs), (E, n_o)), u[:, 0])
    xu = _draw(np.broadcast_to(_cdf(model.alpha_unobs), (E, n_u)), u[:, 1])
    b = np.tile(np.asarray(model.alpha_unobs, dtype=float), (E, 1))
    joint_cdf = _cdf(model.kernel.reshape(n_a, n_o * n_u, n_o * n_u))
    true_tot = np.zeros(E)
    belief_tot = np.zeros(E)
    for t in range(horizon):
        if kind == "fixed-action-sequence":
            a = np.full(E, seq[t])
        elif kind == "local-stationary":
            a = _draw(pol_cdf[xo], u[:, 3 + 2 * t])
        elif kind == "full-information":
            a = _draw(pol_cdf[xo * n_u + xu], u[:, 3 + 2 * t])
        else:
            a = np.empty(E, dtype=int)
            for e in range(E):
                try:
                    a[e] = belief_policy_action(policy, xo[e], b[e])
                except KeyNotCovered as exc:
                    raise KeyNotCovered(f"episode {e}, step {t}: {exc}", episode=e) from None
        disc = beta**t
        true_tot += disc * model.cost[a, xo, xu]
        belief_tot += disc * np.einsum("eu,eu->e", b, model.cost[a, xo])
        s = xo * n_u + xu
        nxt = _draw(joint_cdf[a, s], u[:, 2 + 2 * t])
        xo_next, xu = np.divmod(nxt, n_u)
        # belief update from the observed x_o transition only
        w = np.einsum("eu,euv->ev", b, model.kernel[a, xo, :, xo_next, :])
        b = w / w.sum(axis=1, keepdims=True)
        xo = xo_next
    bias = beta**horizon * model.c_max / (1 - beta)
    return true_tot, belief_tot, horizon, bias, kind


def _summarize(totals, horizon, bias, kind):
    n = totals.size
    mean = float(np.mean(totals))
    se = float(np.std(totals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return SimResult(mean, se, bias, n, horizon, kind, totals)


def simulate(model, policy, config=SimConfig()):
    """Discounted cost of ``policy`` on the true joint chain, truncated at ``config.horizon``.

    ``policy`` is a local :class:`~lsimdp.mdp.Policy`, a
    :class:`~lsimdp.belief_dp.BeliefDpReport` (belief feedback), a
    :class:`JointPolicy` (full information), or a sequence of actions.
    """
    true_tot, _, h, bias, kind = _run(model, policy, config)
    return _summarize(true_tot, h, bias, kind)


def simulate_belief_objective(model, policy, config=SimConfig()):
    """Same sampled trajectories as :func:`simulate`, but charging the belief-averaged stage cost."""
    _, belief_tot, h, bias, kind = _run(model, policy, config)
    return _summarize(belief_tot, h, bias, kind)


def simulate_both(model, policy, config=SimConfig()):
    """Paired run returning ``(simulate result, belief-objective result)``."""
    true_tot, belief_tot, h, bias, kind = _run(model, policy, config)
    return _summarize(true_tot, h, bias, kind), _summarize(belief_tot, h, bias, kind)
