"""Scenario configuration files.

Flat ``key = value`` lines grouped under ``[section]`` headers; ``#`` and
``;`` start comments. Every key is optional. Unknown sections or keys are
errors, reported with their line number::

    [grid]
    rows = 15
    sigma = 0.2

    [sweep]
    alphas = 0.0, 0.5, 1.0
    degree_targets = 6.5, 2.2

    [weights]
    universal = 0.5, 0.5

    [tree.inherent]
    financial = 0.4, 0.9     # weight, value
    technical = 0.6, 0.7
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable

from .rng import check_seed
from .simulation import SweepConfig, VariationConfig
from .topology import GridConfig, TopologyError
from .trust import Leaf, TrustDomainError, TrustTree, TrustWeights2, TrustWeights3
from .voting import VoteParams

logger = logging.getLogger(__name__)

# near-miss weight vectors within this distance of 1 are rescaled with a warning
WEIGHT_RESCALE_TOL = 1e-3


class ConfigError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    vote: VoteParams = field(default_factory=VoteParams)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    variation: VariationConfig = field(default_factory=VariationConfig)
    universal_weights: TrustWeights2 = field(default_factory=TrustWeights2)
    hybrid_weights: TrustWeights3 = field(default_factory=TrustWeights3)
    tree: TrustTree | None = None


def _float(s: str) -> float:
    x = float(s)
    if not math.isfinite(x):
        raise ValueError(f"{s!r} is not finite")
    return x


def _int(s: str) -> int:
    return int(s)


def _floats(s: str) -> tuple[float, ...]:
    return tuple(_float(p) for p in s.split(",") if p.strip())


_GRID_KEYS: dict[str, Callable[[str], Any]] = {
    "rows": _int,
    "cols": _int,
    "distrusted_fraction": _float,
    "target_avg_degree": _float,
    "mu_trusted": _float,
    "mu_distrusted": _float,
    "sigma": _float,
    "seed": _int,
}
_VOTE_KEYS = {"alpha": _float, "remote_weight": _float, "rounds": _int}
_SWEEP_KEYS = {"alphas": _floats, "degree_targets": _floats, "replicates": _int, "master_seed": _int}
_VARIATION_KEYS = {
    "steps": _int,
    "t1_start": _float,
    "t1_end": _float,
    "tau_start": _float,
    "tau_end": _float,
}
_WEIGHT_KEYS = {"universal": _floats, "hybrid": _floats}
_SECTIONS = {
    "grid": _GRID_KEYS,
    "vote": _VOTE_KEYS,
    "sweep": _SWEEP_KEYS,
    "variation": _VARIATION_KEYS,
    "weights": _WEIGHT_KEYS,
}
_TREE_SECTIONS = ("tree.inherent", "tree.observed")


def _weights(values: tuple[float, ...], n: int, cls, lineno: int):
    if len(values) != n:
        raise ConfigError(f"expected {n} weights, got {len(values)}", lineno)
    if any(v < 0 for v in values):
        raise ConfigError("weights must be nonnegative", lineno)
    total = math.fsum(values)
    if abs(total - 1.0) > 1e-9:
        if abs(total - 1.0) > WEIGHT_RESCALE_TOL:
            raise ConfigError(f"weights sum to {total!r}, expected 1", lineno)
        logger.warning("line %d: weights sum to %r; rescaling to 1", lineno, total)
        return cls.normalized(*values)
    return cls(*values)


def parse_config(text: str) -> ScenarioConfig:
    section: str | None = None
    values: dict[str, dict[str, tuple[Any, int]]] = {s: {} for s in _SECTIONS}
    leaves: dict[str, list[tuple[Leaf, int]]] = {s: [] for s in _TREE_SECTIONS}
    section_line: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw
        for mark in ("#", ";"):
            line = line.split(mark, 1)[0]
        line = line.strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            section = line[1:-1].strip()
            if section not in _SECTIONS and section not in _TREE_SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            section_line.setdefault(section, lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any section", lineno)
        key, _, val = (p.strip() for p in line.partition("="))
        if not key:
            raise ConfigError("empty key", lineno)
        if section in _TREE_SECTIONS:
            try:
                parts = _floats(val)
            except ValueError as exc:
                raise ConfigError(f"bad leaf {key!r}: {exc}", lineno) from None
            if len(parts) != 2:
                raise ConfigError(f"leaf {key!r} needs 'weight, value'", lineno)
            if any(leaf.name == key for leaf, _ in leaves[section]):
                raise ConfigError(f"duplicate leaf {key!r}", lineno)
            leaves[section].append((Leaf(key, parts[0], parts[1]), lineno))
            continue
        keys = _SECTIONS[section]
        if key not in keys:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno)
        if key in values[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno)
        try:
            values[section][key] = (keys[key](val), lineno)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None

    def build(section: str, cls, **extra):
        kwargs = {k: v for k, (v, _) in values[section].items()}
        kwargs.update(extra)
        try:
            return cls(**kwargs)
        except (TrustDomainError, TopologyError, ValueError) as exc:
            lines = [n for _, n in values[section].values()]
            raise ConfigError(f"[{section}] {exc}", min(lines) if lines else section_line.get(section)) from None

    grid = build("grid", GridConfig)
    try:
        check_seed(grid.seed)
    except ValueError as exc:
        raise ConfigError(str(exc), values["grid"]["seed"][1]) from None
    vote = build("vote", VoteParams)
    sweep = build("sweep", SweepConfig, grid=grid, vote=vote)
    variation = build("variation", VariationConfig)

    w = values["weights"]
    universal = _weights(w["universal"][0], 2, TrustWeights2, w["universal"][1]) if "universal" in w else TrustWeights2()
    hybrid = _weights(w["hybrid"][0], 3, TrustWeights3, w["hybrid"][1]) if "hybrid" in w else TrustWeights3()

    tree = None
    inh, obs = leaves["tree.inherent"], leaves["tree.observed"]
    if inh or obs:
        if not (inh and obs):
            missing = "tree.observed" if inh else "tree.inherent"
            raise ConfigError(f"trust tree needs both branches; [{missing}] is empty")
        try:
            tree = TrustTree(tuple(l for l, _ in inh), tuple(l for l, _ in obs))
        except TrustDomainError as exc:
            raise ConfigError(str(exc), (inh + obs)[0][1]) from None

    return ScenarioConfig(grid, vote, sweep, variation, universal, hybrid, tree)


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def _fmt(v: Any) -> str:
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return repr(v)


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialise ``cfg``; :func:`parse_config` reads it back to an equal value."""
    out = []

    def section(name: str, obj, keys) -> None:
        out.append(f"[{name}]")
        for f in fields(obj):
            if f.name in keys:
                out.append(f"{f.name} = {_fmt(getattr(obj, f.name))}")
        out.append("")

    section("grid", cfg.grid, _GRID_KEYS)
    section("vote", cfg.vote, _VOTE_KEYS)
    section("sweep", cfg.sweep, _SWEEP_KEYS)
    section("variation", cfg.variation, _VARIATION_KEYS)
    u, h = cfg.universal_weights, cfg.hybrid_weights
    out += [
        "[weights]",
        f"universal = {_fmt((u.inherent, u.observed))}",
        f"hybrid = {_fmt((h.inherent, h.observed, h.voted))}",
        "",
    ]
    if cfg.tree is not None:
        for name, branch in (("tree.inherent", cfg.tree.inherent), ("tree.observed", cfg.tree.observed)):
            out.append(f"[{name}]")
            out += [f"{leaf.name} = {leaf.weight!r}, {leaf.value!r}" for leaf in branch]
            out.append("")
    return "\n".join(out)
