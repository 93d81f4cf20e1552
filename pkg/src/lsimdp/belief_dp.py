"""Dynamic programming on the belief-augmented state ``(x_o, b)``.

The infinite-horizon problem is truncated at the smallest horizon ``H`` with
``beta**H * c_max / (1 - beta) <= accuracy`` and solved by backward induction
over depth levels. Nodes are keyed by ``(x_o, quantized belief)`` per depth, so
the memo is exactly the set of distinct keys reached level by level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .belief import BeliefGraph
from .errors import BudgetExceeded, KeyNotCovered

TIE_TOL = 1e-12
_CHUNK = 20_000


def horizon_for(discount, c_max, accuracy):
    """Smallest ``H`` with ``discount**H * c_max / (1 - discount) <= accuracy``."""
    if accuracy <= 0:
        raise ValueError("accuracy must be positive")
    h = 0
    while discount**h * c_max / (1 - discount) > accuracy:
        h += 1
    return h


def quantize(beliefs, quant_tol):
    """Integer keys for belief rows: round half-up to multiples of ``quant_tol``.

    With ``quant_tol == 0`` the raw float bit patterns are the key.
    """
    beliefs = np.ascontiguousarray(beliefs, dtype=float)
    if quant_tol == 0:
        return beliefs.view(np.int64)
    return np.floor(beliefs / quant_tol + 0.5).astype(np.int64)


@dataclass
class _Level:
    x_o: np.ndarray  # (N,)
    beliefs: np.ndarray  # (N, n_u)
    succ: np.ndarray = None  # (N, A, n_o) index into next level, -1 if impossible
    probs: np.ndarray = None  # (N, A, n_o)


@dataclass
class BeliefDpReport:
    """Result of :func:`solve_belief_dp`.

    ``values[x_o]`` is the truncated optimal cost from ``(x_o, b_0)``;
    ``weighted`` averages it with ``alpha_obs``. ``error_bound`` is
    ``accuracy + H * lipschitz * quant_tol``.
    """

    values: np.ndarray
    weighted: float
    horizon_used: int
    truncation_bound: float
    accuracy: float
    quant_tol: float
    lipschitz: float
    error_bound: float
    root_actions: np.ndarray
    memo_size: int
    n_unobs: int
    _levels: list = field(repr=False, default_factory=list)
    _lookup: dict = field(repr=False, default_factory=dict)
    _nearest: dict = field(repr=False, default_factory=dict)

    @cached_property
    def graph(self):
        """Distinct quantized beliefs over all depths, with the first-seen transitions."""
        nodes, index = [], {}
        edges = {}

        def node_of(b):
            k = quantize(b[None, :], self.quant_tol)[0].tobytes()
            if k not in index:
                index[k] = len(nodes)
                nodes.append(np.array(b))
            return index[k]

        for d, lev in enumerate(self._levels):
            ids = [node_of(b) for b in lev.beliefs]
            if lev.succ is None:
                continue
            nxt = self._levels[d + 1]
            nxt_ids = [node_of(b) for b in nxt.beliefs]
            for n, x_o in enumerate(lev.x_o):
                for a in range(lev.succ.shape[1]):
                    for x_next in range(lev.succ.shape[2]):
                        s = lev.succ[n, a, x_next]
                        if s >= 0:
                            edges.setdefault((ids[n], int(x_o), a, x_next), (nxt_ids[s], float(lev.probs[n, a, x_next])))
        # closed when the unexpanded last level holds no belief unseen at shallower depths
        truncated = False
        if self._levels:
            seen = set()
            for lev in self._levels[:-1]:
                seen.update(k.tobytes() for k in quantize(lev.beliefs, self.quant_tol))
            last = quantize(self._levels[-1].beliefs, self.quant_tol)
            truncated = any(k.tobytes() not in seen for k in last) and len(self._levels) > 1
        return BeliefGraph(nodes=nodes, edges=edges, root=0, depth_reached=max(len(self._levels) - 1, 0), truncated=truncated)

    def to_dict(self, include_graph=True):
        d = {
            "values": self.values.tolist(),
            "weighted_value": self.weighted,
            "horizon_used": self.horizon_used,
            "truncation_bound": self.truncation_bound,
            "accuracy": self.accuracy,
            "quant_tol": self.quant_tol,
            "lipschitz": self.lipschitz,
            "error_bound": self.error_bound,
            "root_actions": self.root_actions.tolist(),
            "memo_size": self.memo_size,
        }
        if include_graph:
            d["graph"] = self.graph.to_dict()
        return d


def _expand(model, level, quant_tol):
    """Successor table of one level and the deduplicated next level."""
    n_a, n_o = model.n_actions, model.n_obs
    N = len(level.x_o)
    succ_x, succ_b, src = [], [], []
    probs = np.zeros((N, n_a, n_o))
    for start in range(0, N, _CHUNK):
        sl = slice(start, min(start + _CHUNK, N))
        b = level.beliefs[sl]
        for a in range(n_a):
            k = model.kernel[a][level.x_o[sl]]  # (n, u, o', u')
            w = np.einsum("nu,nuov->nov", b, k)
            p = w.sum(axis=2)
            probs[sl, a] = p
            nz = np.argwhere(p > 0.0)
            succ_b.append(w[nz[:, 0], nz[:, 1]] / p[nz[:, 0], nz[:, 1]][:, None])
            succ_x.append(nz[:, 1])
            src.append(np.column_stack([nz[:, 0] + start, np.full(len(nz), a), nz[:, 1]]))
    succ_b = np.concatenate(succ_b)
    succ_x = np.concatenate(succ_x)
    src = np.concatenate(src)
    keys = np.column_stack([succ_x, quantize(succ_b, quant_tol)])
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    succ = np.full((N, n_a, n_o), -1, dtype=np.int64)
    succ[src[:, 0], src[:, 1], src[:, 2]] = inverse.ravel()
    probs[succ < 0] = 0.0
    level.succ, level.probs = succ, probs
    return _Level(succ_x[first], succ_b[first])


def _backward(model, levels):
    beta = model.discount
    values = None
    actions_per_level = [None] * len(levels)
    for d in range(len(levels) - 1, -1, -1):
        lev = levels[d]
        q = np.einsum("nu,anu->na", lev.beliefs, model.cost[:, lev.x_o, :])
        if values is not None and lev.succ is not None:
            cont = np.where(lev.succ >= 0, values[np.maximum(lev.succ, 0)], 0.0)
            q = q + beta * np.einsum("nao,nao->na", lev.probs, cont)
        best = q.min(axis=1)
        act = np.argmax(q <= (best + TIE_TOL * (1 + np.abs(best)))[:, None], axis=1)
        values = best
        actions_per_level[d] = act
    return values, actions_per_level


def solve_belief_dp(model, accuracy=1e-4, quant_tol=1e-6, max_memo=2_000_000):
    """Truncated, quantized dynamic program on ``(x_o, b)`` starting from ``b_0 = alpha_unobs``.

    Raises :class:`BudgetExceeded` once the number of memo entries passes
    ``max_memo``; the exception carries a report solved at the horizon reached.
    """
    if quant_tol < 0:
        raise ValueError("quant_tol must be nonnegative")
    beta, c_max = model.discount, model.c_max
    H = horizon_for(beta, c_max, accuracy)
    n_o = model.n_obs
    root = _Level(np.arange(n_o), np.tile(np.asarray(model.alpha_unobs, dtype=float), (n_o, 1)))
    levels = [root] if H > 0 else []
    memo = len(root.x_o) if H > 0 else 0
    exceeded = False
    for _ in range(1, H):
        nxt = _expand(model, levels[-1], quant_tol)
        memo += len(nxt.x_o)
        levels.append(nxt)
        if memo > max_memo:
            exceeded = True
            break
    report = _finish(model, levels, len(levels), accuracy, quant_tol, memo)
    if exceeded:
        raise BudgetExceeded(f"belief memo passed {max_memo} entries at depth {len(levels) - 1}", partial=report)
    return report


def _finish(model, levels, horizon, accuracy, quant_tol, memo):
    beta, c_max = model.discount, model.c_max
    n_o = model.n_obs
    if levels:
        levels[-1].succ = levels[-1].probs = None
        values, acts = _backward(model, levels)
        root_actions = acts[0]
    else:
        values = np.zeros(n_o)
        root_actions = np.zeros(n_o, dtype=int)
        acts = []
    lookup = {}
    for lev, act in zip(levels, acts):
        keys = quantize(lev.beliefs, quant_tol)
        for n in range(len(lev.x_o)):
            lookup.setdefault((int(lev.x_o[n]), keys[n].tobytes()), (n, lev, int(act[n])))
    per_obs = {}
    for (xo, _), (n, lev, act) in lookup.items():
        per_obs.setdefault(xo, ([], []))
        per_obs[xo][0].append(lev.beliefs[n])
        per_obs[xo][1].append(act)
    nearest = {xo: (np.array(reps), np.array(a)) for xo, (reps, a) in per_obs.items()}
    lookup = {k: v[2] for k, v in lookup.items()}
    lips = c_max * (1 + beta) / (1 - beta)
    trunc = beta**horizon * c_max / (1 - beta)
    return BeliefDpReport(
        values=np.asarray(values, dtype=float),
        weighted=float(model.alpha_obs @ values),
        horizon_used=horizon,
        truncation_bound=trunc,
        accuracy=accuracy,
        quant_tol=quant_tol,
        lipschitz=lips,
        error_bound=accuracy + horizon * lips * quant_tol,
        root_actions=np.asarray(root_actions, dtype=int),
        memo_size=memo,
        n_unobs=model.n_unobs,
        _levels=levels,
        _lookup=lookup,
        _nearest=nearest,
    )


def belief_policy_action(report, x_o, b):
    """Greedy action stored for the memo key nearest to ``b`` at ``x_o``.

    Among depths, the shallowest occurrence of a key wins (longest lookahead).
    Raises :class:`KeyNotCovered` when nothing lies within ``quant_tol * |X_u|``.
    """
    b = np.asarray(b, dtype=float)
    key = quantize(b[None, :], report.quant_tol)[0].tobytes()
    hit = report._lookup.get((int(x_o), key))
    if hit is not None:
        return hit
    radius = max(report.quant_tol, 1e-12) * report.n_unobs
    if int(x_o) in report._nearest:
        reps, acts = report._nearest[int(x_o)]
        dist = np.max(np.abs(reps - b), axis=1)
        i = int(np.argmin(dist))
        if dist[i] <= radius:
            return int(acts[i])
    raise KeyNotCovered(f"no solved belief within {radius:g} of {b.tolist()} at x_o={x_o}")
