"""Finite discounted-cost MDPs: Bellman operator, value iteration, exact evaluation, LPs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Disagreement, NotConverged, SingularSystem
from .lp import LpProblem, solve_lp

STOCH_TOL = 1e-9
TIE_TOL = 1e-12


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FiniteMdp:
    """Flat MDP with ``kernel[a, s, s']`` and ``cost[a, s]``."""

    kernel: np.ndarray
    cost: np.ndarray
    discount: float
    alpha: np.ndarray

    def __post_init__(self):
        for name in ("kernel", "cost", "alpha"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        k, c = self.kernel, self.cost
        if k.ndim != 3 or k.shape[1] != k.shape[2]:
            raise ValueError(f"kernel must be [a][s][s'], got {k.shape}")
        if c.shape != k.shape[:2]:
            raise ValueError(f"cost shape {c.shape} does not match kernel {k.shape[:2]}")
        if np.any(k < 0) or np.any(np.abs(k.sum(axis=2) - 1) > STOCH_TOL):
            raise ValueError("kernel rows must be stochastic")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ValueError("costs must be finite and nonnegative")
        if not 0 <= self.discount < 1:
            raise ValueError("discount must lie in [0, 1)")
        object.__setattr__(self, "discount", float(self.discount))
        if self.alpha.shape != (k.shape[1],) or np.any(self.alpha < 0) or abs(self.alpha.sum() - 1) > STOCH_TOL:
            raise ValueError("alpha must be a distribution over states")

    @property
    def n_actions(self):
        return self.kernel.shape[0]

    @property
    def n_states(self):
        return self.kernel.shape[1]


@dataclass(frozen=True)
class Policy:
    """Stationary policy: an action per state, or a distribution per state."""

    kind: str
    table: np.ndarray

    def __post_init__(self):
        if self.kind not in ("deterministic", "randomized"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        dtype = int if self.kind == "deterministic" else float
        t = np.array(self.table, dtype=dtype)
        if self.kind == "deterministic" and t.ndim != 1:
            raise ValueError("deterministic table must be a vector of actions")
        if self.kind == "randomized":
            if t.ndim != 2 or np.any(t < 0) or np.any(np.abs(t.sum(axis=1) - 1) > STOCH_TOL):
                raise ValueError("randomized rows must be distributions")
        if self.kind == "deterministic" and np.any(t < 0):
            raise ValueError("action indices must be nonnegative")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def deterministic(cls, actions):
        return cls("deterministic", actions)

    @classmethod
    def randomized(cls, probs):
        return cls("randomized", probs)

    @property
    def n_states(self):
        return self.table.shape[0]

    def matrix(self, n_actions):
        """Per-state action distribution, shape ``(n_states, n_actions)``."""
        if self.kind == "randomized":
            if self.table.shape[1] != n_actions:
                raise ValueError("policy action count mismatch")
            return np.array(self.table)
        if np.any(self.table >= n_actions):
            raise ValueError("action index out of range")
        m = np.zeros((self.n_states, n_actions))
        m[np.arange(self.n_states), self.table] = 1.0
        return m

    def to_json(self):
        if self.kind == "deterministic":
            return {str(s): int(a) for s, a in enumerate(self.table)}
        return {str(s): [float(p) for p in row] for s, row in enumerate(self.table)}

    @classmethod
    def from_json(cls, data):
        """Inverse of :meth:`to_json`: map from state index to action or distribution."""
        keys = sorted(data, key=int)
        if [int(k) for k in keys] != list(range(len(keys))):
            raise ValueError("policy keys must be 0..n-1")
        rows = [data[k] for k in keys]
        if all(isinstance(r, int) for r in rows):
            return cls.deterministic(rows)
        n_a = max(len(r) for r in rows if isinstance(r, list))
        probs = []
        for r in rows:
            if isinstance(r, int):
                row = [0.0] * n_a
                row[r] = 1.0
                probs.append(row)
            else:
                probs.append(r)
        return cls.randomized(probs)


def q_values(mdp, v):
    """``Q[a, s] = cost[a, s] + beta * sum_s' kernel[a, s, s'] v[s']``."""
    return mdp.cost + mdp.discount * (mdp.kernel @ np.asarray(v, dtype=float))


def bellman_apply(mdp, v, maximize=False):
    """One application of the Bellman operator (min over actions; max if ``maximize``)."""
    q = q_values(mdp, v)
    return q.max(axis=0) if maximize else q.min(axis=0)


def greedy_policy(mdp, v, maximize=False):
    """Greedy deterministic policy; near-ties go to the lowest action index."""
    q = q_values(mdp, v)
    if maximize:
        q = -q
    best = q.min(axis=0)
    slack = TIE_TOL * (1.0 + np.abs(best))
    return Policy.deterministic(np.argmax(q <= best + slack, axis=0))


def value_iteration(mdp, tol=1e-8, max_iter=100_000, maximize=False):
    """Iterate the Bellman operator from zero until the iterate is ``tol``-close to the fixed point.

    Stops when successive iterates differ by at most ``tol (1 - beta) / (2 beta)``
    in sup norm. Returns ``(values, greedy_policy, iterations)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    beta = mdp.discount
    v = np.zeros(mdp.n_states)
    if beta == 0.0:
        v = bellman_apply(mdp, v, maximize)
        return v, greedy_policy(mdp, v, maximize), 1
    threshold = tol * (1 - beta) / (2 * beta)
    for it in range(1, max_iter + 1):
        nv = bellman_apply(mdp, v, maximize)
        diff = np.max(np.abs(nv - v)) if nv.size else 0.0
        v = nv
        if diff <= threshold:
            return v, greedy_policy(mdp, v, maximize), it
    raise NotConverged(f"value iteration did not converge in {max_iter} sweeps", value=v, iterations=max_iter)


def policy_evaluation(mdp, policy):
    """Exact discounted value of a stationary policy via a dense linear solve."""
    pm = policy.matrix(mdp.n_actions)
    p_pi = np.einsum("sa,ast->st", pm, mdp.kernel)
    c_pi = np.einsum("sa,as->s", pm, mdp.cost)
    a_mat = np.eye(mdp.n_states) - mdp.discount * p_pi
    try:
        v = np.linalg.solve(a_mat, c_pi)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    resid = np.max(np.abs(a_mat @ v - c_pi)) if v.size else 0.0
    if resid > 1e-10 * max(1.0, np.max(np.abs(c_pi))):
        raise SingularSystem(f"policy evaluation residual {resid:.3e}")
    return v


def mdp_to_primal_lp(mdp, form="standard"):
    """Value-function LP over free variables ``u(s)``.

    ``form="standard"`` maximizes ``alpha . u`` subject to
    ``u(s) <= cost(a, s) + beta sum_s' kernel(a, s, s') u(s')``; its optimum is
    the optimal (minimal) cost-to-go.

    ``form="reversed"`` uses the reversed inequality
    ``cost(a, s) + beta sum kernel u <= u(s)`` with a minimizing objective. That
    program is bounded too, but its optimum is the value of the *worst*
    stationary policy (the fixed point of the max-Bellman operator), not the
    optimal cost.
    """
    n_s, n_a, beta = mdp.n_states, mdp.n_actions, mdp.discount
    rows, rhs = [], []
    for s in range(n_s):
        for a in range(n_a):
            row = -beta * mdp.kernel[a, s]
            row = row.copy()
            row[s] += 1.0
            rows.append(row)
            rhs.append(mdp.cost[a, s])
    rows = np.array(rows).reshape(n_s * n_a, n_s)
    rhs = np.array(rhs)
    if form == "standard":
        return LpProblem(
            objective=mdp.alpha, direction="max", a=rows, senses=["<="] * len(rhs), b=rhs,
            bounds=[(-np.inf, np.inf)] * n_s,
        )
    if form == "reversed":
        return LpProblem(
            objective=mdp.alpha, direction="min", a=-rows, senses=["<="] * len(rhs), b=-rhs,
            bounds=[(-np.inf, np.inf)] * n_s,
        )
    raise ValueError(f"unknown form {form!r}")


def mdp_to_dual_lp(mdp):
    """Occupation-measure LP over ``y(s, a) >= 0`` (variable index ``s * n_actions + a``).

    Minimizes ``sum y cost`` subject to
    ``sum_a y(s', a) - beta sum_{s, a} kernel(a, s, s') y(s, a) = alpha(s')``.
    """
    n_s, n_a, beta = mdp.n_states, mdp.n_actions, mdp.discount
    a_eq = np.zeros((n_s, n_s * n_a))
    for s in range(n_s):
        for a in range(n_a):
            col = s * n_a + a
            a_eq[:, col] -= beta * mdp.kernel[a, s]
            a_eq[s, col] += 1.0
    cost = np.array([mdp.cost[a, s] for s in range(n_s) for a in range(n_a)])
    return LpProblem(
        objective=cost, direction="min", a=a_eq, senses=["="] * n_s, b=mdp.alpha,
        bounds=[(0.0, np.inf)] * (n_s * n_a),
    )


AGREEMENT_TOL = 1e-6


@dataclass
class MdpSolution:
    """Optimal values from value iteration, cross-checked by both LPs."""

    values: np.ndarray
    policy: Policy
    iterations: int
    weighted: float
    primal_lp: float
    dual_lp: float
    occupation: np.ndarray

    def to_dict(self):
        return {
            "values": self.values.tolist(),
            "policy": self.policy.to_json(),
            "iterations": self.iterations,
            "weighted_value": self.weighted,
            "primal_lp_value": self.primal_lp,
            "dual_lp_value": self.dual_lp,
        }


def solve_mdp(mdp, tol=1e-8):
    """Value iteration plus primal and dual LPs; raises :class:`Disagreement` past 1e-6."""
    values, policy, iters = value_iteration(mdp, tol=tol)
    weighted = float(mdp.alpha @ values)
    primal = solve_lp(mdp_to_primal_lp(mdp))
    dual = solve_lp(mdp_to_dual_lp(mdp))
    if primal.status != "optimal" or dual.status != "optimal":
        raise Disagreement(f"LP status primal={primal.status} dual={dual.status}")
    spread = max(weighted, primal.objective_value, dual.objective_value) - min(
        weighted, primal.objective_value, dual.objective_value
    )
    if spread > AGREEMENT_TOL:
        raise Disagreement(
            f"VI {weighted:.10g}, primal LP {primal.objective_value:.10g}, dual LP {dual.objective_value:.10g}"
        )
    occ = dual.point.reshape(mdp.n_states, mdp.n_actions)
    return MdpSolution(values, policy, iters, weighted, primal.objective_value, dual.objective_value, occ)
