import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsimdp import (
    LsiModel,
    ZeroProbabilityObservation,
    as_belief,
    belief_update,
    expected_cost,
    observation_prob,
    reachable_beliefs,
)
from lsimdp.builders import random_factored_model

from conftest import scalar_model


def test_uniform_preserved_under_doubly_stochastic_action(sec6):
    for xo in range(2):
        for xo2 in range(2):
            np.testing.assert_allclose(belief_update(sec6, [0.5, 0.5], xo, 0, xo2), [0.5, 0.5], atol=1e-15)


def test_point_mass_update(sec6):
    np.testing.assert_allclose(belief_update(sec6, [1.0, 0.0], 0, 0, 1), [0.2, 0.8], atol=1e-15)


def test_zero_probability_observation():
    k = np.zeros((1, 2, 1, 2, 1))
    k[0, :, 0, 0, 0] = 1.0  # x_o always moves to 0
    m = LsiModel(k, np.zeros((1, 2, 1)), 0.5, [0.5, 0.5], [1.0])
    with pytest.raises(ZeroProbabilityObservation):
        belief_update(m, [1.0], 0, 0, 1)


def test_observation_prob_examples(sec6):
    for b in ([0.5, 0.5], [1.0, 0.0], [0.3, 0.7]):
        assert observation_prob(sec6, b, 0, 0, 0) == pytest.approx(0.8, abs=1e-15)
    assert observation_prob(scalar_model(), [1.0], 0, 0, 0) == 1.0


def test_observation_prob_nonfactored_double_sum(rng):
    k = rng.dirichlet(np.ones(4), size=(1, 2, 2)).reshape(1, 2, 2, 2, 2)
    m = LsiModel(k, np.zeros((1, 2, 2)), 0.5, [0.5, 0.5], [0.5, 0.5])
    b = [0.5, 0.5]
    for xo in range(2):
        for xo2 in range(2):
            total = 0.0
            for xu in range(2):
                for xu2 in range(2):
                    total += b[xu] * k[0, xo, xu, xo2, xu2]
            assert observation_prob(m, b, xo, 0, xo2) == pytest.approx(total, abs=1e-15)


def test_expected_cost_examples(sec6):
    assert expected_cost(sec6, [0.5, 0.5], 0, 0) == pytest.approx(1.1, abs=1e-15)
    assert expected_cost(sec6, [0.5, 0.5], 0, 1) == pytest.approx(0.55, abs=1e-15)
    for xo in range(2):
        for a in range(2):
            for k in range(2):
                e = np.eye(2)[k]
                assert expected_cost(sec6, e, xo, a) == sec6.cost[a, xo, k]


def test_as_belief_rejects_bad_vectors():
    with pytest.raises(ValueError):
        as_belief([0.6, 0.6])
    with pytest.raises(ValueError):
        as_belief([1.2, -0.2])


beliefs = st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3).filter(lambda v: sum(v) > 1e-3)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), raw=beliefs, raw2=beliefs, lam=st.floats(0, 1))
def test_belief_properties(seed, raw, raw2, lam):
    rng = np.random.default_rng(seed)
    m = random_factored_model(rng, 2, 3, 2, 0.5)
    b = np.array(raw) / sum(raw)
    b2 = np.array(raw2) / sum(raw2)
    for xo in range(2):
        for a in range(2):
            probs = [observation_prob(m, b, xo, a, x) for x in range(2)]
            assert sum(probs) == pytest.approx(1.0, abs=1e-9)
            mix = expected_cost(m, lam * b + (1 - lam) * b2, xo, a)
            assert mix == pytest.approx(lam * expected_cost(m, b, xo, a) + (1 - lam) * expected_cost(m, b2, xo, a), abs=1e-12)
            # factored kernels: update is b @ P_u(a), whatever the observation
            expected = b @ m.factors.p_unobs[a]
            for x in range(2):
                if probs[x] > 0:
                    nb = belief_update(m, b, xo, a, x)
                    np.testing.assert_allclose(nb, expected, atol=1e-12)
                    assert np.all(nb >= 0) and abs(nb.sum() - 1) <= 1e-9


def test_identity_hidden_kernel_single_node(rng):
    m = random_factored_model(rng, 3, 3, 2, 0.5, unobs_kind="identity")
    g = reachable_beliefs(m, max_depth=5)
    assert len(g.nodes) == 1 and not g.truncated


def test_example_graph_orbit(sec6):
    g = reachable_beliefs(sec6, max_depth=4)
    # edges out of a node depend only on the action
    for (n, xo, a, xo2), (succ, _) in g.edges.items():
        for xo_b in range(2):
            for xo2_b in range(2):
                assert g.edges[(n, xo_b, a, xo2_b)][0] == succ
    # action 0 fixes the uniform root
    assert g.edges[(0, 0, 0, 0)][0] == 0
    # oracle: distinct points of the orbit of b0 under b -> b P_u(a), by brute force
    P = check_factors(sec6)
    pts = [np.array([0.5, 0.5])]
    frontier = list(pts)
    for _ in range(4):
        nxt = []
        for b in frontier:
            for a in range(2):
                nb = b @ P[a]
                if all(np.max(np.abs(nb - q)) > 1e-10 for q in pts):
                    pts.append(nb)
                    nxt.append(nb)
        frontier = nxt
    assert len(g.nodes) == len(pts)
    assert g.truncated


def check_factors(model):
    from lsimdp import check_factorization

    return check_factorization(model).p_unobs


def test_finite_orbit_closes(rng):
    m = random_factored_model(rng, 2, 4, 2, 0.5, unobs_kind="permutation")
    g = reachable_beliefs(m, max_depth=100)
    assert not g.truncated
    assert len(g.nodes) <= 24


def test_finite_orbit_closes_with_zero_dedup(rng):
    # point-mass beliefs move exactly, so no rounding can split the orbit
    m = random_factored_model(rng, 2, 4, 2, 0.5, unobs_kind="permutation")
    m = LsiModel(m.kernel, m.cost, m.discount, m.alpha_obs, [1.0, 0.0, 0.0, 0.0])
    g = reachable_beliefs(m, max_depth=100, dedup_tol=0.0)
    assert not g.truncated
    assert len(g.nodes) <= 4


def test_max_nodes_truncates(sec6):
    g = reachable_beliefs(sec6, max_depth=30, max_nodes=5)
    assert g.truncated and len(g.nodes) <= 5
    # every recorded edge points at a stored node and the triples are complete
    for (n, xo, a, xo2), (succ, p) in g.edges.items():
        assert 0 <= succ < len(g.nodes) and p > 0
        for x in range(2):
            assert (n, xo, a, x) in g.edges


def test_graph_to_dict(sec6):
    d = reachable_beliefs(sec6, max_depth=2).to_dict()
    assert d["nodes"][0] == [0.5, 0.5]
    assert {"node", "x_o", "a", "x_o_next", "successor", "prob"} == set(d["edges"][0])
