"""Frozen-belief approximation and the stationary-belief reduction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .belief import as_belief
from .errors import NotApplicable
from .mdp import FiniteMdp, solve_mdp
from .model import check_factorization

RANK_TOL = 1e-8


@dataclass(frozen=True)
class VirtualModel:
    mdp: FiniteMdp
    frozen_belief: np.ndarray


def build_virtual(model, frozen=None):
    """MDP over ``X_o`` that treats the hidden substate as distributed by ``frozen`` forever.

    ``frozen`` defaults to ``alpha_unobs``.
    """
    b = as_belief(model.alpha_unobs if frozen is None else frozen)
    if b.shape != (model.n_unobs,):
        raise ValueError("frozen belief has the wrong length")
    # p~(x_o'|x_o,a) = sum_{x_u} b(x_u) sum_{x_u'} p(x_o', x_u'|x_o, x_u, a)
    kernel = np.einsum("u,aouv->aov", b, model.obs_marginal())
    kernel = kernel / kernel.sum(axis=2, keepdims=True)
    cost = model.cost @ b
    return VirtualModel(FiniteMdp(kernel, cost, model.discount, model.alpha_obs), b)


def solve_virtual(model, frozen=None, tol=1e-8):
    """Solve the frozen-belief MDP by value iteration and both LPs (agreement within 1e-6)."""
    return solve_mdp(build_virtual(model, frozen).mdp, tol=tol)


def stationary_distribution(p):
    """Unique stationary row vector of an ergodic stochastic matrix.

    Raises :class:`NotApplicable` when the chain has more than one recurrent
    class or is periodic.
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    gen = np.eye(n) - p.T
    sv = np.linalg.svd(gen, compute_uv=False)
    rank = int(np.sum(sv > RANK_TOL))
    if rank != n - 1:
        raise NotApplicable(f"stationary distribution not unique (rank of I - P^T is {rank}, need {n - 1})")
    eig = np.abs(np.linalg.eigvals(p))
    if n > 1 and np.sort(eig)[-2] > 1 - RANK_TOL:
        raise NotApplicable("chain is periodic (a non-unit eigenvalue lies on the unit circle)")
    lhs = gen.copy()
    lhs[-1] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    b = np.linalg.solve(lhs, rhs)
    b = np.clip(b, 0.0, None)
    return b / b.sum()


def stationary_reduction(model, tol=1e-8):
    """Frozen-belief solution at the stationary law of an uncontrolled hidden chain.

    Requires a factored kernel whose hidden factor is the same for every action
    and ergodic. Returns ``(solution, b_s)``.
    """
    factors = check_factorization(model)
    if factors is None:
        raise NotApplicable("kernel does not factorize")
    pu = factors.p_unobs
    if np.max(np.abs(pu - pu[0])) > 1e-9:
        raise NotApplicable("hidden-substate kernel depends on the action")
    b_s = stationary_distribution(pu[0])
    return solve_virtual(model, b_s, tol=tol), b_s
