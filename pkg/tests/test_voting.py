import numpy as np
import pytest

from trustroute.rng import substream
from trustroute.topology import AsGraph, AsNode, GridConfig, Role, TrustEdge, build_example_graph, build_grid_world
from trustroute.trust import TrustDomainError
from trustroute.voting import VoteParams, collect_votes, init_state, run_vote_round, run_votes


def sym(a, b, t_ab, t_ba=None):
    return [TrustEdge(a, b, t_ab), TrustEdge(b, a, t_ab if t_ba is None else t_ba)]


def vote_query_layout():
    """AS1 evaluates its neighbour X, whose other neighbours are AS2..AS4."""
    nodes = [AsNode(n) for n in ("AS1", "AS2", "AS3", "AS4", "X")]
    edges = sym("AS1", "X", 0.7) + sym("AS2", "X", 0.8) + sym("AS3", "X", 0.6) + sym("AS4", "X", 0.9)
    edges += sym("AS1", "AS2", 0.5)
    return AsGraph(nodes, edges)


class ExplodingRng:
    def random(self):
        raise AssertionError("no randomness expected")


def test_vote_query_layout():
    g = vote_query_layout()
    votes = collect_votes(g, "AS1", "X", init_state(g), ExplodingRng(), remote_weight=0.1)
    assert sorted(votes) == sorted([(0.8, 0.5), (0.6, 0.1), (0.9, 0.1)])


def test_subject_with_only_the_evaluator_as_neighbour():
    g = AsGraph([AsNode("a"), AsNode("b")], sym("a", "b", 0.7))
    assert collect_votes(g, "a", "b", init_state(g), ExplodingRng()) == []


def test_derived_votes_are_preferred():
    g = vote_query_layout()
    state = init_state(g).with_derived({("AS3", "X"): 0.2})
    votes = collect_votes(g, "AS1", "X", state, ExplodingRng())
    assert (0.2, 0.1) in votes and (0.6, 0.1) not in votes


def test_distrusted_voter_draws_uniform_noise():
    nodes = [AsNode("e"), AsNode("s"), AsNode("liar", Role.DISTRUSTED)]
    g = AsGraph(nodes, sym("e", "s", 0.7) + sym("liar", "s", 0.9))
    state = init_state(g)
    first = collect_votes(g, "e", "s", state, substream(5, "v"))
    again = collect_votes(g, "e", "s", state, substream(5, "v"))
    assert first == again
    draws = np.array([collect_votes(g, "e", "s", state, substream(seed, "v"))[0].vote for seed in range(4000)])
    assert draws.min() >= 0 and draws.max() < 1
    assert draws.mean() == pytest.approx(0.5, abs=0.02)
    assert np.mean(draws < 0.25) == pytest.approx(0.25, abs=0.02)


def two_voter_graph():
    nodes = [AsNode(n) for n in ("e", "s", "v1", "v2")]
    edges = [
        TrustEdge("e", "s", 0.6),
        TrustEdge("e", "v1", 0.9),
        TrustEdge("e", "v2", 0.3),
        TrustEdge("v1", "s", 0.8),
        TrustEdge("v2", "s", 0.4),
    ]
    return AsGraph(nodes, edges)


def test_two_voter_round():
    g = two_voter_graph()
    out = run_vote_round(g, VoteParams(alpha=0.5), init_state(g), ExplodingRng())
    # 0.5 * 0.6 + 0.5 * (0.72 + 0.12) / 1.2
    assert out.derived("e", "s") == pytest.approx(0.65, abs=1e-12)
    # e's other neighbours have no voters and fall back to direct
    assert out.derived("e", "v1") == 0.9
    assert out.direct("e", "s") == 0.6


def test_alpha_one_keeps_direct_trust():
    g = build_grid_world(GridConfig(rows=6, cols=6, target_avg_degree=5.0), substream(3, "w"))
    out = run_vote_round(g, VoteParams(alpha=1.0), init_state(g), substream(3, "v"))
    for (a, b), pair in out.items():
        if g.is_trusted(a):
            assert pair.derived == pair.direct
        else:
            assert pair.derived is None


def test_identical_honest_trusts_are_a_fixed_point():
    cfg = GridConfig(rows=5, cols=5, target_avg_degree=5.0, distrusted_fraction=0.0, sigma=0.0)
    g = build_grid_world(cfg, substream(1, "w"))
    for alpha in (0.0, 0.37, 1.0):
        out = run_votes(g, VoteParams(alpha=alpha, rounds=3), init_state(g), ExplodingRng())
        assert all(p.derived == pytest.approx(0.7, abs=1e-12) for p in out.values())


def test_rounds_are_synchronous_and_deterministic():
    g = build_grid_world(GridConfig(rows=8, cols=8, target_avg_degree=4.0), substream(9, "w"))
    params = VoteParams(alpha=0.4, rounds=3)
    a = run_votes(g, params, init_state(g), substream(9, "v"))
    b = run_votes(g, params, init_state(g), substream(9, "v"))
    assert dict(a) == dict(b)
    assert all(0.0 <= p.derived <= 1.0 for p in a.values() if p.derived is not None)


def test_update_reads_only_the_input_state():
    # chain e1 -> s <- e2 where each evaluator votes about s for the other;
    # a sequential update would let one round's result leak into the other
    nodes = [AsNode(n) for n in ("e1", "e2", "s")]
    g = AsGraph(nodes, [TrustEdge("e1", "s", 0.9), TrustEdge("e2", "s", 0.1)])
    out = run_vote_round(g, VoteParams(alpha=0.5, remote_weight=1.0), init_state(g), ExplodingRng())
    assert out.derived("e1", "s") == pytest.approx(0.5 * 0.9 + 0.5 * 0.1)
    assert out.derived("e2", "s") == pytest.approx(0.5 * 0.1 + 0.5 * 0.9)


def test_init_state():
    g = build_example_graph()
    state = init_state(g)
    assert len(state) == 9
    assert state.direct("A", "B") == 0.9
    assert state.derived("A", "B") is None
    assert len(init_state(AsGraph())) == 0
    grid = build_grid_world(GridConfig(rows=4, cols=4, target_avg_degree=3.0), substream(0, "w"))
    assert len(init_state(grid)) == len(grid.edges)


def test_vote_params_validation():
    with pytest.raises(TrustDomainError):
        VoteParams(alpha=1.5)
    with pytest.raises(TrustDomainError):
        VoteParams(remote_weight=-0.1)
    with pytest.raises(TrustDomainError):
        VoteParams(rounds=0)
