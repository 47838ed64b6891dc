"""Trust-rate arithmetic.

Trust rates are plain floats in ``[0, 1]``: 0 is complete distrust, 1 is
complete trust and 0.5 is the uncertainty default. Everything here is a
pure function over immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

UNCERTAIN = 0.5
WEIGHT_TOL = 1e-9


class TrustDomainError(ValueError):
    """A value fell outside the domain an operation accepts."""


class NoVotersError(TrustDomainError):
    """Vote aggregation was asked to average an empty or zero-weight pool."""


def make_rate(x: float) -> float:
    """Fold ``x`` into ``[0, 1]`` by clamping.

    Non-finite input raises :class:`TrustDomainError`.
    """
    x = float(x)
    if not math.isfinite(x):
        raise TrustDomainError(f"trust rate must be finite, got {x!r}")
    return min(1.0, max(0.0, x))


def strict_rate(x: float) -> float:
    """Like :func:`make_rate` but rejects out-of-range values instead of clamping."""
    x = float(x)
    if not math.isfinite(x) or not 0.0 <= x <= 1.0:
        raise TrustDomainError(f"trust rate must lie in [0, 1], got {x!r}")
    return x


def _check_weights(ws: Sequence[float]) -> None:
    for w in ws:
        if not math.isfinite(w) or w < 0.0 or w > 1.0:
            raise TrustDomainError(f"weights must lie in [0, 1], got {tuple(ws)}")
    if abs(math.fsum(ws) - 1.0) > WEIGHT_TOL:
        raise TrustDomainError(f"weights must sum to 1, got {tuple(ws)} (sum {math.fsum(ws)!r})")


@dataclass(frozen=True)
class TrustWeights2:
    """Weights of inherent and observed trust."""

    inherent: float = 0.5
    observed: float = 0.5

    def __post_init__(self) -> None:
        _check_weights((self.inherent, self.observed))

    @classmethod
    def normalized(cls, inherent: float, observed: float) -> "TrustWeights2":
        total = inherent + observed
        if total <= 0:
            raise TrustDomainError("weights sum to zero")
        return cls(inherent / total, observed / total)


@dataclass(frozen=True)
class TrustWeights3:
    """Weights of inherent, observed and voted trust."""

    inherent: float = 1 / 3
    observed: float = 1 / 3
    voted: float = 1 / 3

    def __post_init__(self) -> None:
        _check_weights((self.inherent, self.observed, self.voted))

    @classmethod
    def normalized(cls, inherent: float, observed: float, voted: float) -> "TrustWeights3":
        total = inherent + observed + voted
        if total <= 0:
            raise TrustDomainError("weights sum to zero")
        return cls(inherent / total, observed / total, voted / total)


def universal_trust(inherent: float, observed: float, w: TrustWeights2 = TrustWeights2()) -> float:
    """Weighted sum of inherent and observed trust."""
    return make_rate(w.inherent * inherent + w.observed * observed)


def hybrid_trust(
    inherent: float, observed: float, voted: float, w: TrustWeights3 = TrustWeights3()
) -> float:
    """Weighted sum of inherent, observed and voted trust."""
    return make_rate(w.inherent * inherent + w.observed * observed + w.voted * voted)


def combine_alpha(direct: float, voted: float, alpha: float) -> float:
    """``alpha * direct + (1 - alpha) * voted``."""
    if not 0.0 <= alpha <= 1.0:
        raise TrustDomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    return make_rate(alpha * direct + (1.0 - alpha) * voted)


class WeightedVote(NamedTuple):
    vote: float
    weight: float


def aggregate_votes(votes: Iterable[WeightedVote]) -> float:
    """Trust-weighted mean of the votes.

    Raises :class:`NoVotersError` if there is nothing to average, which
    callers use as the signal to fall back to direct trust.
    """
    votes = list(votes)
    for _, w in votes:
        if w < 0:
            raise TrustDomainError(f"vote weight must be nonnegative, got {w!r}")
    total = math.fsum(w for _, w in votes)
    if total <= 0.0:
        raise NoVotersError("no voter with positive weight")
    # normalise weights first so a lone voter comes back bit-exact
    return make_rate(math.fsum(v * (w / total) for v, w in votes))


@dataclass(frozen=True)
class Leaf:
    name: str
    weight: float
    value: float = UNCERTAIN


def _branch_sum(leaves: Sequence[Leaf], branch: str) -> float:
    if not leaves:
        raise TrustDomainError(f"{branch} branch has no leaves")
    names = [leaf.name for leaf in leaves]
    if len(set(names)) != len(names):
        raise TrustDomainError(f"duplicate leaf names in {branch} branch: {names}")
    for leaf in leaves:
        if leaf.weight < 0:
            raise TrustDomainError(f"leaf {leaf.name!r} has negative weight")
        strict_rate(leaf.value)
    total = math.fsum(leaf.weight for leaf in leaves)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise TrustDomainError(f"{branch} leaf weights sum to {total!r}, expected 1")
    return math.fsum(leaf.weight * leaf.value for leaf in leaves)


@dataclass(frozen=True)
class TrustTree:
    """Direct-trust tree with an inherent and an observed branch.

    Leaves are free-form, so any subset of components (political,
    financial, technical, ecological, AS relation, router utilization,
    packet dropping, ...) can be modelled.
    """

    inherent: tuple[Leaf, ...] = field(default_factory=tuple)
    observed: tuple[Leaf, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "inherent", tuple(self.inherent))
        object.__setattr__(self, "observed", tuple(self.observed))
        _branch_sum(self.inherent, "inherent")
        _branch_sum(self.observed, "observed")

    def inherent_trust(self) -> float:
        return make_rate(_branch_sum(self.inherent, "inherent"))

    def observed_trust(self) -> float:
        return make_rate(_branch_sum(self.observed, "observed"))


def evaluate_trust_tree(tree: TrustTree, w: TrustWeights2 = TrustWeights2()) -> float:
    return universal_trust(tree.inherent_trust(), tree.observed_trust(), w)


class TrustBand(Enum):
    STRONG_DISTRUST = "strong distrust"
    WEAK_DISTRUST = "weak distrust"
    NEUTRAL = "neutral"
    WEAK_TRUST = "weak trust"
    STRONG_TRUST = "strong trust"


_BAND_EDGES = (
    (0.2, TrustBand.STRONG_DISTRUST),
    (0.4, TrustBand.WEAK_DISTRUST),
    (0.6, TrustBand.NEUTRAL),
    (0.8, TrustBand.WEAK_TRUST),
)


def classify(rate: float) -> TrustBand:
    # half-open bands, top band closed at 1.0
    for upper, band in _BAND_EDGES:
        if rate < upper:
            return band
    return TrustBand.STRONG_TRUST
