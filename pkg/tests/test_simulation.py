import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trustroute.rng import substream
from trustroute.topology import AsGraph, AsNode, GridConfig, Role, TrustEdge, build_grid_world
from trustroute.trust import TrustDomainError
from trustroute.voting import VoteParams, combine_round, init_state, voted_trust
from trustroute.simulation import (
    SweepConfig,
    VariationConfig,
    detection_failures,
    failure_rates_by_alpha,
    run_alpha_sweep,
    run_replicate,
    run_trust_variation,
)

SMALL_GRID = GridConfig(rows=7, cols=7, target_avg_degree=5.0)


def mixed_graph():
    nodes = [AsNode("e"), AsNode("good"), AsNode("bad", Role.DISTRUSTED)]
    edges = [TrustEdge("e", "good", 0.5), TrustEdge("e", "bad", 0.5), TrustEdge("bad", "e", 0.5)]
    return AsGraph(nodes, edges)


def test_detection_failures_examples():
    g = mixed_graph()
    state = init_state(g)
    assert detection_failures(g, state.with_derived({("e", "good"): 0.7, ("e", "bad"): 0.3})) == 0.0
    assert detection_failures(g, state.with_derived({("e", "good"): 0.5, ("e", "bad"): 0.5})) == 1.0
    assert detection_failures(g, state.with_derived({("e", "good"): 0.6, ("e", "bad"): 0.4})) == 0.0
    assert detection_failures(g, state.with_derived({("e", "good"): 0.59, ("e", "bad"): 0.4})) == 0.5


def test_detection_failures_errors():
    g = mixed_graph()
    with pytest.raises(TrustDomainError):
        detection_failures(g, init_state(g))
    only_liars = AsGraph([AsNode("x", Role.DISTRUSTED), AsNode("y")], [TrustEdge("x", "y", 0.5)])
    with pytest.raises(TrustDomainError):
        detection_failures(only_liars, init_state(only_liars))


def test_variation_endpoints():
    rows = run_trust_variation()
    assert len(rows) == 10
    first, last = rows[0], rows[-1]
    assert (first.t1, first.tau) == (1.0, 0.05)
    assert first.cost_direct == pytest.approx(21.0, abs=1e-12)
    assert first.cost_recommended == pytest.approx(21.0, abs=1e-12)
    assert last.t1 == pytest.approx(0.1, abs=1e-12)
    assert last.tau == pytest.approx(0.33, abs=1e-12)
    assert last.cost_direct == pytest.approx(10 + 1 / 0.33, abs=1e-9)
    assert round(last.cost_direct, 2) == 13.03
    assert round(last.cost_recommended, 2) == 40.30
    assert last.cost_recommended > first.cost_recommended
    assert last.cost_direct < first.cost_direct


def test_variation_schedule():
    rows = run_trust_variation()
    t1 = [r.t1 for r in rows]
    tau = [r.tau for r in rows]
    assert np.allclose(np.diff(t1), -0.1)
    ratios = np.array(tau[1:]) / np.array(tau[:-1])
    assert np.allclose(ratios, (0.33 / 0.05) ** (1 / 9))
    assert run_trust_variation(VariationConfig(steps=1))[0].t1 == 1.0


@given(
    st.integers(1, 30),
    st.floats(0.01, 1.0),
    st.floats(0.01, 1.0),
    st.floats(0.01, 1.0),
    st.floats(0.01, 1.0),
)
def test_variation_gap_identity(steps, a, b, c, d):
    for r in run_trust_variation(VariationConfig(steps, a, b, c, d)):
        down = 1 / r.tau
        assert r.cost_recommended - r.cost_direct == pytest.approx(down * (1 - r.t1) / r.t1, abs=1e-9, rel=1e-9)
        assert r.cost_recommended >= r.cost_direct - 1e-9


def test_variation_config_validation():
    with pytest.raises(TrustDomainError):
        VariationConfig(steps=0)
    with pytest.raises(TrustDomainError):
        VariationConfig(t1_end=0.0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_vectorised_rates_match_reference(seed):
    g = build_grid_world(SMALL_GRID, substream(seed, "w"))
    state = init_state(g)
    voted = voted_trust(g, VoteParams(), state, substream(seed, "v"))
    alphas = [i / 10 for i in range(11)]
    fast = failure_rates_by_alpha(g, state, voted, alphas)
    slow = [detection_failures(g, combine_round(state, voted, a)) for a in alphas]
    assert fast == slow


def test_sweep_is_deterministic_and_worker_independent():
    cfg = SweepConfig(grid=SMALL_GRID, degree_targets=(5.0, 2.2), replicates=4, master_seed=11)
    a = run_alpha_sweep(cfg)
    b = run_alpha_sweep(cfg)
    c = run_alpha_sweep(cfg, workers=2)
    assert np.array_equal(a.failures, b.failures)
    assert np.array_equal(a.failures, c.failures)
    assert np.array_equal(a.degrees, c.degrees)
    assert a.cells() == c.cells()


def test_sweep_result_shape_and_stats():
    cfg = SweepConfig(grid=SMALL_GRID, degree_targets=(5.0,), replicates=3, master_seed=2)
    res = run_alpha_sweep(cfg)
    assert res.failures.shape == (1, 11, 3)
    cells = res.cells()
    assert len(cells) == 11
    for cell in cells:
        raw = res.failures[0, res.alphas.index(cell.alpha)]
        assert cell.mean_failure == pytest.approx(raw.mean())
        assert cell.std_failure == pytest.approx(np.std(raw, ddof=1))
        assert 0 <= cell.mean_failure <= 1
        assert cell.replicates == 3
    assert res.best_alpha(5.0) in res.alphas
    single = run_alpha_sweep(cfg.__class__(grid=SMALL_GRID, degree_targets=(5.0,), replicates=1))
    assert all(c.std_failure == 0.0 for c in single.cells())


def test_alphas_share_worlds_and_votes():
    cfg = SweepConfig(grid=SMALL_GRID, degree_targets=(5.0,), replicates=1, master_seed=3)
    rates, _ = run_replicate(cfg, 0, 0)
    only = SweepConfig(grid=SMALL_GRID, degree_targets=(5.0,), alphas=(0.3,), replicates=1, master_seed=3)
    assert run_replicate(only, 0, 0)[0] == [rates[3]]


def test_multi_round_path():
    vote = VoteParams(rounds=2)
    cfg = SweepConfig(grid=SMALL_GRID, vote=vote, alphas=(0.0, 0.5, 1.0), degree_targets=(5.0,), replicates=2)
    res = run_alpha_sweep(cfg)
    assert np.all((res.failures >= 0) & (res.failures <= 1))
    # alpha=1 ignores votes entirely, so the round count cannot matter
    one = run_alpha_sweep(SweepConfig(grid=SMALL_GRID, alphas=(1.0,), degree_targets=(5.0,), replicates=2))
    assert np.array_equal(res.failures[0, 2], one.failures[0, 0])


def test_more_liars_hurt_pure_voting():
    def at_zero(fraction):
        grid = GridConfig(distrusted_fraction=fraction)
        cfg = SweepConfig(grid=grid, alphas=(0.0,), degree_targets=(6.5,), replicates=20, master_seed=4)
        return run_alpha_sweep(cfg).mean_failure(0.0, 6.5)

    assert at_zero(0.4) >= at_zero(0.2)


def test_direct_only_matches_gaussian_tail():
    cfg = SweepConfig(alphas=(1.0,), degree_targets=(6.5,), replicates=30, master_seed=5)
    phi = 0.5 * math.erfc(0.5 / math.sqrt(2))
    assert run_alpha_sweep(cfg).mean_failure(1.0, 6.5) == pytest.approx(phi, abs=0.03)


def test_sweep_config_validation():
    with pytest.raises(TrustDomainError):
        SweepConfig(replicates=0)
    with pytest.raises(TrustDomainError):
        SweepConfig(alphas=(1.2,))
    with pytest.raises(TrustDomainError):
        SweepConfig(alphas=())
    with pytest.raises(Exception):
        SweepConfig(degree_targets=(9.0,))
