"""AS graphs, the worked example topology and the grid-world generators."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Hashable, Iterable, Iterator, Mapping

import numpy as np

from .trust import UNCERTAIN, TrustDomainError, strict_rate

logger = logging.getLogger(__name__)

AsId = Hashable


class TopologyError(ValueError):
    pass


class TopologyFormatError(TopologyError):
    """Raised by the text loader; ``diagnostics`` holds ``(lineno, message)`` pairs."""

    def __init__(self, diagnostics: list[tuple[int, str]]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(f"line {n}: {msg}" for n, msg in diagnostics))


class Role(Enum):
    TRUSTED = "trusted"
    DISTRUSTED = "distrusted"


@dataclass(frozen=True)
class AsNode:
    id: AsId
    role: Role = Role.TRUSTED
    grid_pos: tuple[int, int] | None = None


@dataclass(frozen=True)
class TrustEdge:
    src: AsId
    dst: AsId
    trust: float = UNCERTAIN
    base_cost: float = 1.0


class AsGraph:
    """Directed AS graph with per-edge direct trust and per-node role.

    Trust is asymmetric: ``A -> B`` and ``B -> A`` are independent edges.
    Instances are treated as immutable; the ``with_*`` helpers return new
    graphs.
    """

    def __init__(self, nodes: Iterable[AsNode] = (), edges: Iterable[TrustEdge] = ()):
        self._nodes: dict[AsId, AsNode] = {}
        for node in nodes:
            if node.id in self._nodes:
                raise TopologyError(f"duplicate node {node.id!r}")
            self._nodes[node.id] = node
        self._edges: dict[tuple[AsId, AsId], TrustEdge] = {}
        out: dict[AsId, list[AsId]] = {n: [] for n in self._nodes}
        inn: dict[AsId, list[AsId]] = {n: [] for n in self._nodes}
        for e in edges:
            if e.src not in self._nodes or e.dst not in self._nodes:
                raise TopologyError(f"edge {e.src!r}->{e.dst!r} has an unknown endpoint")
            if e.src == e.dst:
                raise TopologyError(f"self-loop on {e.src!r}")
            if (e.src, e.dst) in self._edges:
                raise TopologyError(f"duplicate edge {e.src!r}->{e.dst!r}")
            try:
                strict_rate(e.trust)
            except TrustDomainError as exc:
                raise TopologyError(f"edge {e.src!r}->{e.dst!r}: {exc}") from None
            if not (math.isfinite(e.base_cost) and e.base_cost > 0):
                raise TopologyError(f"edge {e.src!r}->{e.dst!r}: base cost must be positive")
            self._edges[(e.src, e.dst)] = e
            out[e.src].append(e.dst)
            inn[e.dst].append(e.src)
        self._out = {n: tuple(sorted(v)) for n, v in out.items()}
        self._in = {n: tuple(sorted(v)) for n, v in inn.items()}

    # lookups

    @property
    def nodes(self) -> Mapping[AsId, AsNode]:
        return self._nodes

    @property
    def edges(self) -> Mapping[tuple[AsId, AsId], TrustEdge]:
        return self._edges

    def node_ids(self) -> list[AsId]:
        return sorted(self._nodes)

    def edge_list(self) -> list[TrustEdge]:
        return [self._edges[k] for k in sorted(self._edges)]

    def __contains__(self, node_id: AsId) -> bool:
        return node_id in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def role(self, node_id: AsId) -> Role:
        return self._nodes[node_id].role

    def is_trusted(self, node_id: AsId) -> bool:
        return self._nodes[node_id].role is Role.TRUSTED

    def has_edge(self, src: AsId, dst: AsId) -> bool:
        return (src, dst) in self._edges

    def edge(self, src: AsId, dst: AsId) -> TrustEdge:
        return self._edges[(src, dst)]

    def trust(self, src: AsId, dst: AsId) -> float:
        return self._edges[(src, dst)].trust

    def neighbors(self, node_id: AsId) -> tuple[AsId, ...]:
        """Nodes ``node_id`` holds a direct trust for (outgoing edges)."""
        return self._out[node_id]

    def in_neighbors(self, node_id: AsId) -> tuple[AsId, ...]:
        """Nodes holding a direct trust for ``node_id`` (incoming edges)."""
        return self._in[node_id]

    def undirected_pairs(self) -> list[tuple[AsId, AsId]]:
        pairs = {(a, b) if a <= b else (b, a) for a, b in self._edges}
        return sorted(pairs)

    def __iter__(self) -> Iterator[AsId]:
        return iter(self.node_ids())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AsGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __repr__(self) -> str:
        return f"AsGraph({len(self._nodes)} nodes, {len(self._edges)} edges)"

    # derived graphs

    def with_nodes(self, nodes: Iterable[AsNode]) -> "AsGraph":
        return AsGraph(nodes, self._edges.values())

    def with_edges(self, edges: Iterable[TrustEdge]) -> "AsGraph":
        return AsGraph(self._nodes.values(), edges)


def average_degree(g: AsGraph) -> float:
    """Mean undirected degree over all nodes."""
    if len(g) == 0:
        return 0.0
    return 2 * len(g.undirected_pairs()) / len(g)


def build_example_graph() -> AsGraph:
    """The eight-AS worked example with trusts seen from A's side.

    Only the links of the three A-to-H paths are present, one direction each.
    """
    nodes = [AsNode(n) for n in "ABCDEGHJ"]
    links = [
        ("A", "B", 0.9), ("B", "G", 0.8), ("G", "H", 0.6),
        ("A", "J", 0.6), ("J", "H", 0.56),
        ("A", "E", 0.89), ("E", "C", 0.98), ("C", "D", 0.68), ("D", "H", 0.71),
    ]
    return AsGraph(nodes, [TrustEdge(a, b, t) for a, b, t in links])


@dataclass(frozen=True)
class GridConfig:
    rows: int = 15
    cols: int = 15
    distrusted_fraction: float = 0.2
    target_avg_degree: float = 6.5
    mu_trusted: float = 0.7
    mu_distrusted: float = 0.3
    sigma: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise TopologyError("grid needs at least one row and column")
        if not 0.0 <= self.distrusted_fraction < 1.0:
            raise TopologyError("distrusted_fraction must lie in [0, 1)")
        if self.sigma < 0:
            raise TopologyError("sigma must be nonnegative")
        if not self.target_avg_degree > 0:
            raise TopologyError("target_avg_degree must be positive")
        full = full_grid_degree(self.rows, self.cols)
        if self.target_avg_degree > full + 1e-12:
            raise TopologyError(
                f"target_avg_degree {self.target_avg_degree} exceeds the full grid's {full:.4f}"
            )

    def replace(self, **changes) -> "GridConfig":
        return replace(self, **changes)


def full_grid_degree(rows: int, cols: int) -> float:
    """Average degree of an untrimmed ``rows x cols`` king's-move grid."""
    horiz = rows * (cols - 1)
    vert = (rows - 1) * cols
    diag = 2 * (rows - 1) * (cols - 1)
    return 2 * (horiz + vert + diag) / (rows * cols)


def generate_grid(cfg: GridConfig) -> AsGraph:
    """Full grid where each node links to its (up to eight) king's-move neighbours.

    No wraparound. Every undirected link becomes two directed edges carrying
    the uncertainty default until :func:`sample_direct_trust` runs.
    """
    rows, cols = cfg.rows, cfg.cols
    nodes = [AsNode(r * cols + c, grid_pos=(r, c)) for r in range(rows) for c in range(cols)]
    edges = []
    for r in range(rows):
        for c in range(cols):
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr, cc = r + dr, c + dc
                    if (dr or dc) and 0 <= rr < rows and 0 <= cc < cols:
                        edges.append(TrustEdge(r * cols + c, rr * cols + cc))
    return AsGraph(nodes, edges)


def thin_links(g: AsGraph, target_avg_degree: float, rng: np.random.Generator) -> AsGraph:
    """Remove uniformly random undirected links until the average degree is <= target."""
    n = len(g)
    pairs = g.undirected_pairs()
    current = average_degree(g)
    if target_avg_degree < 0 or target_avg_degree > current + 1e-12:
        raise TopologyError(
            f"cannot thin to average degree {target_avg_degree}: current is {current:.4f}"
        )
    if n == 0:
        return g
    # fewest removals k with 2 (P - k) / n <= target
    keep = math.floor(target_avg_degree * n / 2 + 1e-9)
    k = max(0, len(pairs) - keep)
    if k == 0:
        return g
    order = rng.permutation(len(pairs))
    removed = {pairs[i] for i in order[:k]}
    kept = [
        e for e in g.edges.values()
        if ((e.src, e.dst) if e.src <= e.dst else (e.dst, e.src)) not in removed
    ]
    return g.with_edges(kept)


def assign_roles(g: AsGraph, fraction: float, rng: np.random.Generator) -> AsGraph:
    """Mark ``round(fraction * n)`` uniformly chosen nodes distrusted, the rest trusted."""
    if not 0.0 <= fraction < 1.0:
        raise TopologyError("fraction must lie in [0, 1)")
    ids = g.node_ids()
    k = int(math.floor(fraction * len(ids) + 0.5))
    bad = set()
    if k:
        bad = {ids[i] for i in rng.choice(len(ids), size=k, replace=False)}
    return g.with_nodes(
        replace(node, role=Role.DISTRUSTED if node.id in bad else Role.TRUSTED)
        for node in g.nodes.values()
    )


def sample_direct_trust(g: AsGraph, cfg: GridConfig, rng: np.random.Generator) -> AsGraph:
    """Draw each directed edge's trust from a Gaussian centred on the subject's role mean.

    Samples are clamped into [0, 1]. Edges are visited in sorted order so the
    result depends only on the generator state.
    """
    edges = g.edge_list()
    if not edges:
        return g
    mu = np.array(
        [cfg.mu_trusted if g.is_trusted(e.dst) else cfg.mu_distrusted for e in edges]
    )
    draws = np.clip(mu + cfg.sigma * rng.standard_normal(len(edges)), 0.0, 1.0)
    return g.with_edges(replace(e, trust=float(t)) for e, t in zip(edges, draws))


def build_grid_world(
    cfg: GridConfig, rng: np.random.Generator, target_avg_degree: float | None = None
) -> AsGraph:
    """Full pipeline: grid, thinning, role assignment, trust sampling."""
    target = cfg.target_avg_degree if target_avg_degree is None else target_avg_degree
    g = generate_grid(cfg)
    g = thin_links(g, target, rng)
    g = assign_roles(g, cfg.distrusted_fraction, rng)
    return sample_direct_trust(g, cfg, rng)


# text format


def _format_id(node_id: AsId) -> str:
    s = str(node_id)
    if not s or any(ch.isspace() for ch in s) or s.startswith("#"):
        raise TopologyError(f"node id {node_id!r} cannot be written to the text format")
    return s


def dump_topology(g: AsGraph) -> str:
    lines = []
    for nid in g.node_ids():
        lines.append(f"node {_format_id(nid)} {g.role(nid).value}")
    for e in g.edge_list():
        line = f"edge {_format_id(e.src)} {_format_id(e.dst)} {e.trust!r}"
        if e.base_cost != 1.0:
            line += f" {e.base_cost!r}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def _parse_float(tok: str) -> float:
    x = float(tok)
    if not math.isfinite(x):
        raise ValueError(f"non-finite number {tok!r}")
    return x


def parse_topology(text: str) -> AsGraph:
    """Parse the line-oriented topology format.

    ``node <id> <trusted|distrusted>`` and ``edge <from> <to> <trust> [base_cost]``;
    ``#`` starts a comment. All problems are collected and raised together
    as a :class:`TopologyFormatError` with line numbers. If every id is a
    decimal integer, ids are returned as ``int``.
    """
    diags: list[tuple[int, str]] = []
    nodes: dict[str, tuple[int, Role]] = {}
    edges: dict[tuple[str, str], tuple[int, float, float]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kind = toks[0]
        if kind == "node":
            if len(toks) != 3:
                diags.append((lineno, "expected 'node <id> <trusted|distrusted>'"))
                continue
            try:
                role = Role(toks[2])
            except ValueError:
                diags.append((lineno, f"unknown role {toks[2]!r}"))
                continue
            if toks[1] in nodes:
                diags.append((lineno, f"duplicate node {toks[1]!r} (first on line {nodes[toks[1]][0]})"))
                continue
            nodes[toks[1]] = (lineno, role)
        elif kind == "edge":
            if len(toks) not in (4, 5):
                diags.append((lineno, "expected 'edge <from> <to> <trust> [base_cost]'"))
                continue
            a, b = toks[1], toks[2]
            try:
                trust = _parse_float(toks[3])
                cost = _parse_float(toks[4]) if len(toks) == 5 else 1.0
            except ValueError as exc:
                diags.append((lineno, f"bad number: {exc}"))
                continue
            if not 0.0 <= trust <= 1.0:
                diags.append((lineno, f"trust {trust!r} outside [0, 1]"))
                continue
            if cost <= 0:
                diags.append((lineno, f"base cost {cost!r} must be positive"))
                continue
            if a == b:
                diags.append((lineno, f"self-loop on {a!r}"))
                continue
            if (a, b) in edges:
                diags.append((lineno, f"duplicate edge {a}->{b} (first on line {edges[(a, b)][0]})"))
                continue
            edges[(a, b)] = (lineno, trust, cost)
        else:
            diags.append((lineno, f"unknown record type {kind!r}"))
    for (a, b), (lineno, _, _) in edges.items():
        for end in (a, b):
            if end not in nodes:
                diags.append((lineno, f"edge endpoint {end!r} is not a declared node"))
    if diags:
        diags.sort()
        raise TopologyFormatError(diags)

    if nodes and all(_is_int(k) for k in nodes):
        conv = int
    else:
        conv = str
    return AsGraph(
        [AsNode(conv(k), role) for k, (_, role) in nodes.items()],
        [TrustEdge(conv(a), conv(b), t, c) for (a, b), (_, t, c) in edges.items()],
    )


def _is_int(tok: str) -> bool:
    return tok.isdigit() and str(int(tok)) == tok


def validate_topology(text: str) -> list[tuple[int, str]]:
    """Return the diagnostics for ``text`` (empty if it parses cleanly)."""
    try:
        parse_topology(text)
    except TopologyFormatError as exc:
        return exc.diagnostics
    return []
