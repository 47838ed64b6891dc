"""Experiment runners: the trust-variation cost curves and the alpha sweep."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .rng import check_seed, substream
from .routing import path_cost_direct, path_cost_recommended
from .topology import AsGraph, GridConfig, average_degree, build_grid_world
from .trust import TrustDomainError
from .voting import TrustState, VoteParams, combine_round, init_state, run_votes, voted_trust

logger = logging.getLogger(__name__)

TRUSTED_THRESHOLD = 0.6
DISTRUSTED_THRESHOLD = 0.4


def detection_failures(g: AsGraph, state: TrustState) -> float:
    """Share of trusted evaluators' neighbour assessments that land on the wrong side.

    A trusted subject rated below 0.6 or a distrusted one rated above 0.4
    is a failure; the thresholds themselves count as success.
    """
    failures = 0
    total = 0
    for evaluator in g.node_ids():
        if not g.is_trusted(evaluator):
            continue
        for subject in g.neighbors(evaluator):
            rate = state.derived(evaluator, subject)
            if rate is None:
                raise TrustDomainError(f"no derived trust for pair {(evaluator, subject)!r}")
            if g.is_trusted(subject):
                failures += rate < TRUSTED_THRESHOLD
            else:
                failures += rate > DISTRUSTED_THRESHOLD
            total += 1
    if total == 0:
        raise TrustDomainError("no trusted evaluator has a neighbour")
    return failures / total


# trust variation


@dataclass(frozen=True)
class VariationConfig:
    steps: int = 10
    t1_start: float = 1.0
    t1_end: float = 0.1
    tau_start: float = 0.05
    tau_end: float = 0.33

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise TrustDomainError("steps must be positive")
        for name in ("t1_start", "t1_end", "tau_start", "tau_end"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise TrustDomainError(f"{name} must lie in (0, 1], got {v!r}")


@dataclass(frozen=True)
class VariationStep:
    step: int
    t1: float
    tau: float
    cost_direct: float
    cost_recommended: float


def run_trust_variation(cfg: VariationConfig = VariationConfig()) -> list[VariationStep]:
    """Path cost as the first-hop trust falls linearly and the downstream trust grows geometrically.

    The downstream path is treated as one aggregate link of trust ``tau``,
    i.e. a downstream cost of ``1 / tau``.
    """
    k = cfg.steps
    out = []
    for i in range(k):
        if k == 1:
            t1, tau = cfg.t1_start, cfg.tau_start
        else:
            t1 = cfg.t1_start + (cfg.t1_end - cfg.t1_start) * i / (k - 1)
            tau = cfg.tau_start * (cfg.tau_end / cfg.tau_start) ** (i / (k - 1))
        downstream = 1.0 / tau
        out.append(
            VariationStep(
                step=i,
                t1=t1,
                tau=tau,
                cost_direct=path_cost_direct([t1, tau]),
                cost_recommended=path_cost_recommended(t1, downstream),
            )
        )
    return out


# alpha sweep


def _default_alphas() -> tuple[float, ...]:
    return tuple(round(0.1 * i, 10) for i in range(11))


@dataclass(frozen=True)
class SweepConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    vote: VoteParams = field(default_factory=VoteParams)
    alphas: tuple[float, ...] = field(default_factory=_default_alphas)
    degree_targets: tuple[float, ...] = (6.5, 2.2)
    replicates: int = 200
    master_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "degree_targets", tuple(float(d) for d in self.degree_targets))
        if not self.alphas or not self.degree_targets:
            raise TrustDomainError("alphas and degree_targets must be nonempty")
        for a in self.alphas:
            if not 0.0 <= a <= 1.0:
                raise TrustDomainError(f"alpha {a!r} outside [0, 1]")
        for d in self.degree_targets:
            # validates against the grid's maximum
            self.grid.replace(target_avg_degree=d)
        if self.replicates < 1:
            raise TrustDomainError("replicates must be at least 1")
        check_seed(self.master_seed)


@dataclass(frozen=True)
class SweepCell:
    alpha: float
    degree_target: float
    mean_failure: float
    std_failure: float
    mean_realized_degree: float
    replicates: int


@dataclass
class SweepResult:
    """Per-cell statistics plus the raw per-replicate failure rates.

    ``failures[d, a, r]`` is the rate for degree target ``d``, alpha ``a``
    and replicate ``r``; ``degrees[d, r]`` is the realised average degree.
    """

    alphas: tuple[float, ...]
    degree_targets: tuple[float, ...]
    failures: np.ndarray
    degrees: np.ndarray

    def cells(self) -> list[SweepCell]:
        out = []
        n = self.failures.shape[2]
        for di, deg in enumerate(self.degree_targets):
            for ai, alpha in enumerate(self.alphas):
                f = self.failures[di, ai]
                out.append(
                    SweepCell(
                        alpha=alpha,
                        degree_target=deg,
                        mean_failure=float(f.mean()),
                        std_failure=float(f.std(ddof=1)) if n > 1 else 0.0,
                        mean_realized_degree=float(self.degrees[di].mean()),
                        replicates=n,
                    )
                )
        return out

    def mean_failure(self, alpha: float, degree_target: float) -> float:
        di = self.degree_targets.index(degree_target)
        ai = _index_of(self.alphas, alpha)
        return float(self.failures[di, ai].mean())

    def best_alpha(self, degree_target: float) -> float:
        """Alpha with the lowest mean failure (first one on ties)."""
        di = self.degree_targets.index(degree_target)
        means = self.failures[di].mean(axis=1)
        return self.alphas[int(np.argmin(means))]


def _index_of(values: Sequence[float], x: float) -> int:
    for i, v in enumerate(values):
        if math.isclose(v, x, abs_tol=1e-12):
            return i
    raise KeyError(x)


def failure_rates_by_alpha(
    g: AsGraph, state: TrustState, voted: dict, alphas: Sequence[float]
) -> list[float]:
    """Vectorised ``detection_failures(g, combine_round(state, voted, alpha))`` for each alpha."""
    if not voted:
        raise TrustDomainError("no trusted evaluator has a neighbour")
    pairs = list(voted)
    direct = np.array([state[p].direct for p in pairs])
    v = np.array([np.nan if voted[p] is None else voted[p] for p in pairs])
    good = np.array([g.is_trusted(s) for _, s in pairs])
    has_vote = ~np.isnan(v)
    out = []
    for alpha in alphas:
        derived = direct.copy()
        derived[has_vote] = np.clip(alpha * direct[has_vote] + (1.0 - alpha) * v[has_vote], 0.0, 1.0)
        fails = np.where(good, derived < TRUSTED_THRESHOLD, derived > DISTRUSTED_THRESHOLD)
        out.append(int(fails.sum()) / len(pairs))
    return out


def run_replicate(cfg: SweepConfig, degree_index: int, replicate: int) -> tuple[list[float], float]:
    """Failure rate for every alpha on one generated world, plus its realised degree.

    The world and the liars' votes come from substreams keyed only by
    ``(degree_index, replicate)``, so every alpha sees the same world and
    the same votes.
    """
    world_rng = substream(cfg.master_seed, "world", degree_index, replicate)
    g = build_grid_world(cfg.grid, world_rng, cfg.degree_targets[degree_index])
    state = init_state(g)
    rates = []
    if cfg.vote.rounds == 1:
        voted = voted_trust(g, cfg.vote, state, substream(cfg.master_seed, "votes", degree_index, replicate))
        rates = failure_rates_by_alpha(g, state, voted, cfg.alphas)
    else:
        for alpha in cfg.alphas:
            params = VoteParams(alpha, cfg.vote.remote_weight, cfg.vote.rounds)
            vote_rng = substream(cfg.master_seed, "votes", degree_index, replicate)
            rates.append(detection_failures(g, run_votes(g, params, state, vote_rng)))
    return rates, average_degree(g)


def _run_job(args):
    cfg, di, r = args
    return di, r, run_replicate(cfg, di, r)


def run_alpha_sweep(cfg: SweepConfig = SweepConfig(), workers: int = 1) -> SweepResult:
    """Detection failure over the alpha x degree grid.

    Results are identical for any ``workers`` count: each replicate owns
    its substreams and lands in a fixed array slot.
    """
    nd, na, nr = len(cfg.degree_targets), len(cfg.alphas), cfg.replicates
    failures = np.empty((nd, na, nr))
    degrees = np.empty((nd, nr))
    jobs = [(cfg, di, r) for di in range(nd) for r in range(nr)]
    if workers <= 1:
        results = map(_run_job, jobs)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (8 * workers)))
    try:
        for di, r, (rates, deg) in results:
            failures[di, :, r] = rates
            degrees[di, r] = deg
    finally:
        if pool is not None:
            pool.shutdown()
    logger.info("alpha sweep finished: %d worlds", len(jobs))
    return SweepResult(cfg.alphas, cfg.degree_targets, failures, degrees)
