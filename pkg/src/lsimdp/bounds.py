"""Performance-gap constants and the two comparison-bound checks."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .approx import solve_virtual
from .belief import reachable_beliefs
from .belief_dp import solve_belief_dp
from .errors import HypothesisNotSatisfied
from .full_info import per_obs_values, solve_full_info
from .model import check_factorization


@dataclass
class GapReport:
    c_bar: float
    c_under: float
    c_cap: float
    c_bar_prime: float
    c_under_prime: float
    c_cap_prime: float
    belief_set_truncated: bool
    factorized: bool

    def to_dict(self):
        return asdict(self)


@dataclass
class BoundCheck:
    gap: float
    bound: float
    holds: bool
    truncated: bool = False

    def to_dict(self):
        return asdict(self)


def _cap(hi, lo, discount):
    return max(hi, -lo) / (1 - discount)


def compute_gap_constants(model):
    """``(C_bar, C_under, C)`` from all ordered cost differences across hidden states."""
    c = model.cost  # [a, x_o, x_u]
    diff = c[:, :, :, None] - c[:, :, None, :]
    hi, lo = float(diff.max()), float(diff.min())
    return hi, lo, _cap(hi, lo, model.discount)


def compute_gap_constants_belief(model, graph):
    """Belief-set analogues of :func:`compute_gap_constants` over the nodes of ``graph``.

    When ``graph.truncated`` is set the constants are lower estimates.
    """
    beliefs = np.asarray(graph.nodes, dtype=float)
    cbar = np.einsum("nu,aou->aon", beliefs, model.cost)
    spread = cbar.max(axis=2) - cbar.min(axis=2)
    hi = float(spread.max())
    lo = -hi
    return hi, lo, _cap(hi, lo, model.discount), graph.truncated


def gap_report(model, graph):
    hi, lo, cap = compute_gap_constants(model)
    hi2, lo2, cap2, trunc = compute_gap_constants_belief(model, graph)
    return GapReport(hi, lo, cap, hi2, lo2, cap2, trunc, check_factorization(model) is not None)


def _require_factored(model):
    if check_factorization(model) is None:
        raise HypothesisNotSatisfied("transition kernel does not factorize into observed and hidden parts")


def verify_theorem5(model, tol=1e-8):
    """Frozen-belief optimum vs full-information optimum, per initial ``x_o``.

    The full-information value at ``x_o`` averages over ``alpha_unobs``. Holds
    when the largest gap is at most ``C + tol``.
    """
    _require_factored(model)
    virt = solve_virtual(model, tol=tol)
    full = solve_full_info(model, tol=tol)
    gap = float(np.max(np.abs(virt.values - per_obs_values(model, full))))
    _, _, cap = compute_gap_constants(model)
    return BoundCheck(gap, cap, gap <= cap + tol)


def verify_theorem6(model, tol=1e-8, graph=None, accuracy=1e-4, quant_tol=1e-6, report=None):
    """Belief-DP optimum vs frozen-belief optimum, per initial ``x_o``.

    The bound is computed over the nodes of ``graph`` (enumerated to depth 8 by
    default). If the graph is truncated the verdict is advisory and flagged.
    Holds when the gap is at most ``C' + accuracy + tol``.
    """
    _require_factored(model)
    if graph is None:
        graph = reachable_beliefs(model)
    if report is None:
        report = solve_belief_dp(model, accuracy=accuracy, quant_tol=quant_tol)
    virt = solve_virtual(model, tol=tol)
    gap = float(np.max(np.abs(report.values - virt.values)))
    _, _, cap, trunc = compute_gap_constants_belief(model, graph)
    return BoundCheck(gap, cap, gap <= cap + report.accuracy + tol, trunc)
