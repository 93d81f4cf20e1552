"""Belief arithmetic over the hidden substate.

A belief is a plain 1-d numpy array over ``X_u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import ZeroProbabilityObservation

BELIEF_TOL = 1e-9


def as_belief(probs):
    """Validate and return ``probs`` as a float array."""
    b = np.asarray(probs, dtype=float)
    if b.ndim != 1:
        raise ValueError("belief must be a vector")
    if np.any(b < 0) or not np.all(np.isfinite(b)):
        raise ValueError("belief entries must be finite and nonnegative")
    if abs(b.sum() - 1.0) > BELIEF_TOL:
        raise ValueError(f"belief sums to {b.sum()!r}, expected 1")
    return b


def _joint_next(model, b, x_o, a):
    # w[x_o', x_u'] = sum_{x_u} p(x_o', x_u' | x_o, x_u, a) b(x_u)
    return np.einsum("u,uov->ov", b, model.kernel[a, x_o])


def observation_prob(model, b, x_o, a, x_o_next):
    """Probability of moving to ``x_o_next`` from ``x_o`` under belief ``b`` and action ``a``."""
    return float(_joint_next(model, np.asarray(b, dtype=float), x_o, a)[x_o_next].sum())


def observation_probs(model, b, x_o, a):
    """Vector of :func:`observation_prob` over every ``x_o_next``."""
    return _joint_next(model, np.asarray(b, dtype=float), x_o, a).sum(axis=1)


def belief_update(model, b, x_o, a, x_o_next):
    """Bayes update of ``b`` after observing ``x_o -> x_o_next`` under action ``a``.

    Raises :class:`ZeroProbabilityObservation` if the transition is impossible.
    """
    w = _joint_next(model, np.asarray(b, dtype=float), x_o, a)[x_o_next]
    z = w.sum()
    if not z > 0.0:
        raise ZeroProbabilityObservation(
            f"observation {x_o}->{x_o_next} under action {a} has zero probability"
        )
    return w / z


def expected_cost(model, b, x_o, a):
    """Stage cost averaged over the hidden substate under ``b``."""
    return float(np.dot(np.asarray(b, dtype=float), model.cost[a, x_o]))


@dataclass
class BeliefGraph:
    """Deduplicated reachable beliefs.

    ``edges`` maps ``(node, x_o, a, x_o_next)`` to ``(successor, probability)``.
    Nodes at the depth frontier of a truncated graph have no outgoing edges.
    """

    nodes: list
    edges: dict = field(default_factory=dict)
    root: int = 0
    depth_reached: int = 0
    truncated: bool = False

    def beliefs(self):
        return np.array(self.nodes)

    def to_dict(self):
        return {
            "root": self.root,
            "depth_reached": self.depth_reached,
            "truncated": self.truncated,
            "nodes": [list(map(float, n)) for n in self.nodes],
            "edges": [
                {"node": k[0], "x_o": k[1], "a": k[2], "x_o_next": k[3], "successor": v[0], "prob": v[1]}
                for k, v in self.edges.items()
            ],
        }


class _NodeIndex:
    """Insertion-ordered belief store with L-inf merging."""

    def __init__(self, tol):
        self.tol = tol
        self.nodes = []
        self._buckets = {}

    def _key(self, b):
        if self.tol == 0:
            return tuple(b.tolist())
        return tuple(np.floor(b / self.tol).astype(np.int64).tolist())

    def find(self, b):
        key = self._key(b)
        if self.tol == 0:
            hits = self._buckets.get(key, ())
            return hits[0] if hits else None
        best = None
        for off in product((-1, 0, 1), repeat=len(key)):
            for idx in self._buckets.get(tuple(k + o for k, o in zip(key, off)), ()):
                if (best is None or idx < best) and np.max(np.abs(self.nodes[idx] - b)) <= self.tol:
                    best = idx
        return best

    def add(self, b):
        idx = len(self.nodes)
        self.nodes.append(b)
        self._buckets.setdefault(self._key(b), []).append(idx)
        return idx


def reachable_beliefs(model, max_depth=8, dedup_tol=1e-10, max_nodes=100_000):
    """Breadth-first enumeration of beliefs reachable from ``alpha_unobs``.

    Every ``(x_o, a, x_o_next)`` with positive observation probability is
    expanded from every node. The last level is expanded once more without
    adding nodes, so ``truncated`` is False exactly when the set closed.
    """
    if max_depth < 0 or dedup_tol < 0 or max_nodes < 1:
        raise ValueError("need max_depth >= 0, dedup_tol >= 0, max_nodes >= 1")
    index = _NodeIndex(dedup_tol)
    root = index.add(np.array(model.alpha_unobs, dtype=float))
    edges = {}
    frontier = [root]
    depth = 0
    truncated = False
    n_o, n_a = model.n_obs, model.n_actions
    while frontier:
        next_frontier = []
        for node in frontier:
            b = index.nodes[node]
            for x_o, a in product(range(n_o), range(n_a)):
                w = _joint_next(model, b, x_o, a)
                probs = w.sum(axis=1)
                out = {}
                complete = True
                for x_next in range(n_o):
                    p = probs[x_next]
                    if not p > 0.0:
                        continue
                    nb = w[x_next] / p
                    succ = index.find(nb)
                    if succ is None:
                        if depth >= max_depth or len(index.nodes) >= max_nodes:
                            complete = False
                            continue
                        succ = index.add(nb)
                        next_frontier.append(succ)
                    out[x_next] = (succ, float(p))
                # a triple is recorded whole or not at all
                if complete:
                    for x_next, edge in out.items():
                        edges[(node, x_o, a, x_next)] = edge
                else:
                    truncated = True
        if truncated:
            if next_frontier:
                depth += 1
            break
        if next_frontier:
            depth += 1
        frontier = next_frontier
    return BeliefGraph(nodes=index.nodes, edges=edges, root=root, depth_reached=depth, truncated=truncated)
