"""Trust-normalised path costs and path-vector route selection.

Two cost models are supported:

``DIRECT_SUM``
    every link costs ``base / trust`` and a path costs the sum.
``RECOMMENDED``
    the first-hop trust also discounts everything the neighbour
    advertises: ``(1 + advertised) / t1``. The neighbour advertises the
    plain additive cost of the rest of its path, so only the sender's own
    first hop is applied twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .topology import AsGraph, AsId, TopologyError
from .trust import TrustDomainError

Path = tuple  # tuple of AsId, source first


class CompleteDistrustError(TrustDomainError):
    """A zero trust rate makes the cost unbounded."""


class CostModel(Enum):
    DIRECT_SUM = "direct"
    RECOMMENDED = "recommended"


def normalized_cost(c: float, t: float) -> float:
    """Routing criterion ``c`` scaled by trust ``t``: ``c / t``."""
    if t <= 0:
        raise CompleteDistrustError("trust 0 gives an unbounded cost")
    return c / t


def path_cost_direct(link_trusts: Sequence[float], base_costs: Sequence[float] | None = None) -> float:
    if not link_trusts:
        raise ValueError("path has no links")
    if base_costs is None:
        base_costs = [1.0] * len(link_trusts)
    return math.fsum(normalized_cost(c, t) for c, t in zip(base_costs, link_trusts))


def path_cost_recommended(t1: float, downstream_cost: float, base_cost: float = 1.0) -> float:
    """``(base + downstream) / t1``; ``downstream_cost`` is 0 when the neighbour is the destination."""
    if downstream_cost < 0:
        raise ValueError("downstream cost must be nonnegative")
    return normalized_cost(base_cost + downstream_cost, t1)


def _link_costs(g: AsGraph, path: Sequence[AsId]) -> list[tuple[float, float]]:
    out = []
    for a, b in zip(path, path[1:]):
        e = g.edge(a, b)
        out.append((e.trust, e.base_cost))
    return out


def path_cost(g: AsGraph, path: Sequence[AsId], model: CostModel) -> float:
    """Cost of an explicit path under ``model`` (0 for the one-node path)."""
    links = _link_costs(g, path)
    if not links:
        return 0.0
    if model is CostModel.DIRECT_SUM:
        return path_cost_direct([t for t, _ in links], [c for _, c in links])
    (t1, c1), rest = links[0], links[1:]
    downstream = path_cost_direct([t for t, _ in rest], [c for _, c in rest]) if rest else 0.0
    return path_cost_recommended(t1, downstream, c1)


@dataclass(frozen=True)
class RouteEntry:
    """Best known route from ``as_path[0]`` to ``destination``.

    ``cost`` ranks routes under ``model``; ``advertised`` is the additive
    cost handed on to upstream neighbours (equal to ``cost`` for
    ``DIRECT_SUM``).
    """

    destination: AsId
    next_hop: AsId
    as_path: Path
    cost: float
    model: CostModel
    advertised: float

    def _key(self):
        return (self.cost, len(self.as_path), self.as_path)


def _candidate(g: AsGraph, owner: AsId, offer: RouteEntry, model: CostModel) -> RouteEntry | None:
    if owner in offer.as_path:
        return None
    e = g.edge(owner, offer.as_path[0])
    if e.trust <= 0:
        return None
    link = e.base_cost / e.trust
    if model is CostModel.DIRECT_SUM:
        cost = link + offer.cost
    else:
        cost = (e.base_cost + offer.advertised) / e.trust
    return RouteEntry(
        destination=offer.destination,
        next_hop=offer.as_path[0],
        as_path=(owner,) + offer.as_path,
        cost=cost,
        model=model,
        advertised=link + offer.advertised,
    )


def candidate_routes(
    g: AsGraph, owner: AsId, table: dict[AsId, RouteEntry], model: CostModel
) -> list[RouteEntry]:
    """Loop-free candidates ``owner`` can form from its neighbours' entries in ``table``."""
    out = []
    for nb in g.neighbors(owner):
        offer = table.get(nb)
        if offer is not None:
            cand = _candidate(g, owner, offer, model)
            if cand is not None:
                out.append(cand)
    return out


def propagate_routes(
    g: AsGraph, destination: AsId, model: CostModel, max_rounds: int | None = None
) -> dict[AsId, RouteEntry]:
    """Path-vector iteration to a fixed point.

    Each node in turn (sorted order) looks at the best routes its
    neighbours currently hold and adopts its cheapest loop-free candidate
    (ties: shorter path, then smaller path). Passes repeat until one
    changes nothing, so the result is a fixed point: no node can improve
    on what its neighbours hold. Updating in place rather than in lockstep
    matters for ``RECOMMENDED``, where lockstep rounds can flip-flop
    forever; if sorted passes still cycle, later passes visit nodes in a
    shuffled order drawn from a fixed seed, which breaks the cycle while
    keeping the result reproducible. Zero-trust links are unusable. Nodes
    that cannot reach ``destination`` get no entry.
    """
    if destination not in g:
        raise TopologyError(f"unknown destination {destination!r}")
    base = RouteEntry(destination, destination, (destination,), 0.0, model, 0.0)
    table: dict[AsId, RouteEntry] = {destination: base}
    if max_rounds is None:
        max_rounds = 40 * len(g) + 100
    sorted_passes = 4 * len(g) + 10
    ids = [n for n in g.node_ids() if n != destination]
    shuffle = np.random.default_rng(0)
    for i in range(max_rounds):
        changed = False
        order = ids if i < sorted_passes else [ids[j] for j in shuffle.permutation(len(ids))]
        for node in order:
            cands = candidate_routes(g, node, table, model)
            best = min(cands, key=RouteEntry._key) if cands else None
            if best != table.get(node):
                changed = True
                if best is None:
                    del table[node]
                else:
                    table[node] = best
        if not changed:
            return table
    raise RuntimeError(f"route propagation did not settle within {max_rounds} passes")


def enumerate_paths(g: AsGraph, src: AsId, dst: AsId, max_len: int) -> list[Path]:
    """All simple directed paths from ``src`` to ``dst`` with at most ``max_len`` nodes.

    Depth-first over sorted neighbours, so the output is in lexicographic order.
    """
    if src == dst:
        raise ValueError("src and dst must differ")
    found: list[Path] = []
    stack = [src]
    on_path = {src}

    def walk(node):
        if len(stack) >= max_len:
            return
        for nb in g.neighbors(node):
            if nb in on_path:
                continue
            if nb == dst:
                found.append(tuple(stack) + (dst,))
                continue
            stack.append(nb)
            on_path.add(nb)
            walk(nb)
            stack.pop()
            on_path.discard(nb)

    walk(src)
    return found
