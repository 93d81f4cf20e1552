"""Occupation-measure LPs restricted to policies that ignore the hidden substate.

Both programs are kept in their plain form. Their mutual
consistency is measured by the caller rather than assumed; note in particular
that the equal-mass constraint ``y(x_o, x_u, a) == y(x_o, x_u', a)`` is
stronger than requiring the policy to ignore ``x_u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, LsiMdpError
from .full_info import build_full_info
from .lp import LpProblem, solve_lp
from .mdp import FiniteMdp, Policy, policy_evaluation

CONCENTRATION = 1 - 1e-8


@dataclass
class ConstrainedDual:
    occupation: np.ndarray  # [x_o, x_u, a]
    objective: float
    policy: Policy

    def to_dict(self):
        return {
            "objective": self.objective,
            "occupation": self.occupation.tolist(),
            "policy": self.policy.to_json(),
        }


@dataclass
class ConstrainedPrimal:
    status: str
    objective: float
    values: np.ndarray  # [x_o, x_u], None unless optimal

    def to_dict(self):
        return {
            "status": self.status,
            "objective": self.objective,
            "values": None if self.values is None else self.values.tolist(),
        }


def _yidx(model, x_o, x_u, a):
    return (x_o * model.n_unobs + x_u) * model.n_actions + a


def constrained_dual_lp(model):
    """Build the equal-mass occupation LP over ``y[x_o, x_u, a] >= 0``."""
    n_o, n_u, n_a, beta = model.n_obs, model.n_unobs, model.n_actions, model.discount
    nv = n_o * n_u * n_a
    rows, rhs, senses = [], [], []
    for xo2 in range(n_o):
        for xu2 in range(n_u):
            row = np.zeros(nv)
            for a in range(n_a):
                row[_yidx(model, xo2, xu2, a)] += 1.0
            for xo in range(n_o):
                for xu in range(n_u):
                    for a in range(n_a):
                        row[_yidx(model, xo, xu, a)] -= beta * model.kernel[a, xo, xu, xo2, xu2]
            rows.append(row)
            rhs.append(model.alpha_obs[xo2] * model.alpha_unobs[xu2])
            senses.append("=")
    # pairs xu < xu2 suffice; the other orderings repeat these rows or are trivial
    for xo in range(n_o):
        for a in range(n_a):
            for xu in range(n_u):
                for xu2 in range(xu + 1, n_u):
                    row = np.zeros(nv)
                    row[_yidx(model, xo, xu, a)] = 1.0
                    row[_yidx(model, xo, xu2, a)] = -1.0
                    rows.append(row)
                    rhs.append(0.0)
                    senses.append("=")
    cost = np.array([model.cost[a, xo, xu] for xo in range(n_o) for xu in range(n_u) for a in range(n_a)])
    return LpProblem(cost, np.array(rows).reshape(-1, nv), senses, rhs, direction="min")


def extract_policy(model, occupation):
    """Local policy from an occupation measure ``[x_o, x_u, a]``.

    An action carrying at least ``1 - 1e-8`` of the mass at ``x_o`` is taken
    deterministically; otherwise the mass is split proportionally. States with
    no mass get action 0.
    """
    mass = occupation.sum(axis=1)  # [x_o, a]
    probs = np.zeros_like(mass)
    deterministic = True
    for xo in range(model.n_obs):
        total = mass[xo].sum()
        if total <= 0:
            probs[xo, 0] = 1.0
            continue
        share = mass[xo] / total
        top = int(np.argmax(share))
        if share[top] >= CONCENTRATION:
            probs[xo, top] = 1.0
        else:
            probs[xo] = share
            deterministic = False
    if deterministic:
        return Policy.deterministic(np.argmax(probs, axis=1))
    return Policy.randomized(probs)


def solve_constrained_dual(model):
    sol = solve_lp(constrained_dual_lp(model))
    if sol.status == "infeasible":
        raise Infeasible("equal-mass occupation LP is infeasible", solution=sol)
    if sol.status != "optimal":
        raise LsiMdpError(f"constrained dual LP ended with status {sol.status}")
    y = np.clip(sol.point, 0.0, None).reshape(model.n_obs, model.n_unobs, model.n_actions)
    return ConstrainedDual(y, sol.objective_value, extract_policy(model, y))


def constrained_primal_lp(model):
    """Build the aggregated value LP over free ``u[x_o, x_u]`` (one row per ``(x_o, a)``)."""
    n_o, n_u, n_a, beta = model.n_obs, model.n_unobs, model.n_actions, model.discount
    nv = n_o * n_u
    rows, rhs = [], []
    for xo in range(n_o):
        for a in range(n_a):
            # sum_xu u(xo,xu) - beta sum_{xu,xo',xu'} p u(xo',xu') >= sum_xu c(xo,xu,a)
            row = -beta * model.kernel[a, xo].sum(axis=0).ravel()
            row[xo * n_u:(xo + 1) * n_u] += 1.0
            rows.append(row)
            rhs.append(model.cost[a, xo].sum())
    weights = np.outer(model.alpha_obs, model.alpha_unobs).ravel()
    return LpProblem(
        weights, np.array(rows).reshape(-1, nv), [">="] * len(rhs), rhs, direction="min",
        bounds=[(-np.inf, np.inf)] * nv,
    )


def solve_constrained_primal(model):
    """Solve the aggregated value LP; unbounded or infeasible status is reported, not raised."""
    sol = solve_lp(constrained_primal_lp(model))
    if sol.status != "optimal":
        return ConstrainedPrimal(sol.status, float("nan"), None)
    return ConstrainedPrimal("optimal", sol.objective_value, sol.point.reshape(model.n_obs, model.n_unobs))


def local_to_joint_policy(model, policy):
    """Lift a policy over ``x_o`` to the joint state space."""
    pm = policy.matrix(model.n_actions)
    if pm.shape[0] != model.n_obs:
        raise ValueError("policy must be defined on every observable substate")
    return Policy.randomized(np.repeat(pm, model.n_unobs, axis=0))


def audit_policy(model, policy):
    """Exact alpha-weighted discounted cost of a local stationary policy on the joint chain."""
    mdp: FiniteMdp = build_full_info(model)
    v = policy_evaluation(mdp, local_to_joint_policy(model, policy))
    return float(mdp.alpha @ v)
