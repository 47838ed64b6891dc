"""Neighbourhood vote querying and hybrid trust updates.

An evaluator assessing one of its neighbours asks that neighbour's other
neighbours for their opinion. Votes are weighted by the evaluator's direct
trust in the voter when the voter is also its own neighbour, and by a low
constant otherwise. Distrusted voters answer with uniform noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple

import numpy as np

from .topology import AsGraph, AsId
from .trust import NoVotersError, TrustDomainError, WeightedVote, aggregate_votes, combine_alpha

Pair = tuple  # (evaluator, subject)


class PairTrust(NamedTuple):
    direct: float
    derived: float | None = None

    @property
    def current(self) -> float:
        return self.direct if self.derived is None else self.derived


class TrustState(Mapping):
    """Per directed (evaluator, subject) pair: direct and derived trust."""

    __slots__ = ("_pairs",)

    def __init__(self, pairs: Mapping[Pair, PairTrust] | None = None):
        self._pairs = dict(pairs or {})

    def __getitem__(self, key: Pair) -> PairTrust:
        return self._pairs[key]

    def __iter__(self) -> Iterator[Pair]:
        return iter(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __repr__(self) -> str:
        return f"TrustState({len(self._pairs)} pairs)"

    def direct(self, evaluator: AsId, subject: AsId) -> float:
        return self._pairs[(evaluator, subject)].direct

    def derived(self, evaluator: AsId, subject: AsId) -> float | None:
        return self._pairs[(evaluator, subject)].derived

    def current(self, evaluator: AsId, subject: AsId) -> float:
        return self._pairs[(evaluator, subject)].current

    def with_derived(self, updates: Mapping[Pair, float]) -> "TrustState":
        pairs = dict(self._pairs)
        for key, value in updates.items():
            pairs[key] = pairs[key]._replace(derived=value)
        return TrustState(pairs)


def init_state(g: AsGraph) -> TrustState:
    return TrustState({(e.src, e.dst): PairTrust(e.trust) for e in g.edge_list()})


@dataclass(frozen=True)
class VoteParams:
    alpha: float = 0.5
    remote_weight: float = 0.1
    rounds: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise TrustDomainError("alpha must lie in [0, 1]")
        if not 0.0 <= self.remote_weight <= 1.0:
            raise TrustDomainError("remote_weight must lie in [0, 1]")
        if self.rounds < 1:
            raise TrustDomainError("rounds must be positive")


def collect_votes(
    g: AsGraph,
    evaluator: AsId,
    subject: AsId,
    state: TrustState,
    rng: np.random.Generator,
    remote_weight: float = 0.1,
) -> list[WeightedVote]:
    """Votes about ``subject`` from the nodes that hold a trust for it.

    The evaluator and the subject never vote. A trusted voter reports its
    derived trust if it has one, else its direct trust; a distrusted voter
    draws one uniform value from ``rng`` (voters are visited in sorted order).
    """
    votes = []
    for voter in g.in_neighbors(subject):
        if voter == evaluator:
            continue
        if g.is_trusted(voter):
            value = state.current(voter, subject)
        else:
            value = float(rng.random())
        if (evaluator, voter) in state:
            weight = state.direct(evaluator, voter)
        else:
            weight = remote_weight
        votes.append(WeightedVote(value, weight))
    return votes


def voted_trust(
    g: AsGraph, params: VoteParams, state: TrustState, rng: np.random.Generator
) -> dict[Pair, float | None]:
    """Aggregated vote for every (trusted evaluator, neighbour) pair.

    ``None`` marks pairs with no usable voter. Independent of ``alpha``.
    """
    out: dict[Pair, float | None] = {}
    for evaluator in g.node_ids():
        if not g.is_trusted(evaluator):
            continue
        for subject in g.neighbors(evaluator):
            votes = collect_votes(g, evaluator, subject, state, rng, params.remote_weight)
            try:
                out[(evaluator, subject)] = aggregate_votes(votes)
            except NoVotersError:
                out[(evaluator, subject)] = None
    return out


def combine_round(state: TrustState, voted: Mapping[Pair, float | None], alpha: float) -> TrustState:
    updates = {}
    for pair, v in voted.items():
        direct = state[pair].direct
        updates[pair] = direct if v is None else combine_alpha(direct, v, alpha)
    return state.with_derived(updates)


def run_vote_round(
    g: AsGraph, params: VoteParams, state: TrustState, rng: np.random.Generator
) -> TrustState:
    """One synchronous round: all votes read ``state``, all updates land together.

    Only trusted evaluators update. With no usable voters the derived value
    falls back to direct trust.
    """
    return combine_round(state, voted_trust(g, params, state, rng), params.alpha)


def run_votes(
    g: AsGraph, params: VoteParams, state: TrustState, rng: np.random.Generator
) -> TrustState:
    for _ in range(params.rounds):
        state = run_vote_round(g, params, state, rng)
    return state
