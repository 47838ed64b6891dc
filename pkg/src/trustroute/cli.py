"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime or
domain error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Sequence, TextIO

from . import __version__
from .config import ConfigError, ScenarioConfig, load_config
from .rng import check_seed, substream
from .routing import CostModel, enumerate_paths, path_cost, propagate_routes
from .simulation import run_alpha_sweep, run_trust_variation
from .topology import (
    GridConfig,
    TopologyError,
    build_example_graph,
    build_grid_world,
    dump_topology,
    validate_topology,
)
from .trust import TrustDomainError

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(s: str) -> int:
    try:
        return check_seed(int(s))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(s: str) -> int:
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _global_options(suppress: bool) -> argparse.ArgumentParser:
    # shared by the top-level parser and every subcommand
    default = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=_u64, default=default, help="unsigned 64-bit master seed")
    p.add_argument("--out", type=Path, default=default, help="output file (default: stdout)")
    p.add_argument("--config", type=Path, default=default, help="scenario config file")
    p.add_argument("--workers", type=_positive_int, default=argparse.SUPPRESS if suppress else 1,
                   help="worker processes for alpha-sweep")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trustroute", parents=[_global_options(False)],
                     description="Hybrid trust model for inter-domain routing.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    common = _global_options(True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("example-paths", parents=[common], help="costs of the worked-example paths")
    p.add_argument("--model", choices=["both", "direct", "recommended"], default="both")
    p.set_defaults(func=cmd_example_paths)

    p = sub.add_parser("trust-variation", parents=[common], help="cost curves as trust varies")
    p.set_defaults(func=cmd_trust_variation)

    p = sub.add_parser("alpha-sweep", parents=[common], help="detection failure over alpha and degree")
    p.add_argument("--replicates", type=_positive_int, help="override the configured replicate count")
    p.set_defaults(func=cmd_alpha_sweep)

    topo = sub.add_parser("topology", help="generate or validate topology files")
    tsub = topo.add_subparsers(dest="action", required=True, parser_class=_Parser)
    g = tsub.add_parser("generate", parents=[common], help="write a thinned grid world")
    defaults = GridConfig()
    g.add_argument("--rows", type=_positive_int, default=None)
    g.add_argument("--cols", type=_positive_int, default=None)
    g.add_argument("--degree", type=float, default=None, help=f"target average degree ({defaults.target_avg_degree})")
    g.add_argument("--fraction", type=float, default=None, help=f"distrusted fraction ({defaults.distrusted_fraction})")
    g.add_argument("--sigma", type=float, default=None, help=f"trust standard deviation ({defaults.sigma})")
    g.set_defaults(func=cmd_topology_generate)
    v = tsub.add_parser("validate", parents=[common], help="check a topology file")
    v.add_argument("file", type=Path)
    v.set_defaults(func=cmd_topology_validate)
    return parser


@contextmanager
def _output(path: Path | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _scenario(args) -> ScenarioConfig:
    if args.config is None:
        return ScenarioConfig()
    try:
        return load_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from None


def _csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def example_paths_rows(model_flag: str = "both") -> list[tuple[str, str, str]]:
    models = {
        "both": [CostModel.DIRECT_SUM, CostModel.RECOMMENDED],
        "direct": [CostModel.DIRECT_SUM],
        "recommended": [CostModel.RECOMMENDED],
    }[model_flag]
    g = build_example_graph()
    paths = enumerate_paths(g, "A", "H", len(g))
    rows = []
    for m in models:
        for p in paths:
            rows.append(("-".join(p), m.value, f"{path_cost(g, p, m):.4f}"))
    for m in models:
        best = propagate_routes(g, "H", m)["A"]
        rows.append(("best:" + "-".join(best.as_path), m.value, f"{best.cost:.4f}"))
    return rows


def cmd_example_paths(args) -> int:
    with _output(args.out) as fh:
        fh.write(_csv(example_paths_rows(args.model), ["path", "model", "cost"]))
    return EXIT_OK


def cmd_trust_variation(args) -> int:
    cfg = _scenario(args).variation
    rows = [(s.step, repr(s.t1), repr(s.tau), repr(s.cost_direct), repr(s.cost_recommended))
            for s in run_trust_variation(cfg)]
    with _output(args.out) as fh:
        fh.write(_csv(rows, ["step", "t1", "tau", "cost_direct", "cost_recommended"]))
    return EXIT_OK


def cmd_alpha_sweep(args) -> int:
    cfg = _scenario(args).sweep
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.replicates is not None:
        changes["replicates"] = args.replicates
    if changes:
        cfg = dataclasses.replace(cfg, **changes)
    result = run_alpha_sweep(cfg, workers=args.workers)
    rows = [
        (repr(c.alpha), repr(c.degree_target), repr(c.mean_realized_degree),
         repr(c.mean_failure), repr(c.std_failure), c.replicates)
        for c in result.cells()
    ]
    header = ["alpha", "degree_target", "mean_realized_degree", "mean_failure", "std_failure", "replicates"]
    with _output(args.out) as fh:
        fh.write(_csv(rows, header))
    return EXIT_OK


def cmd_topology_generate(args) -> int:
    cfg = _scenario(args).grid
    changes = {k: v for k, v in {
        "rows": args.rows,
        "cols": args.cols,
        "target_avg_degree": args.degree,
        "distrusted_fraction": args.fraction,
        "sigma": args.sigma,
        "seed": args.seed,
    }.items() if v is not None}
    try:
        cfg = dataclasses.replace(cfg, **changes)
    except TopologyError as exc:
        raise UsageError(str(exc)) from None
    g = build_grid_world(cfg, substream(cfg.seed, "topology"))
    with _output(args.out) as fh:
        fh.write(dump_topology(g))
    return EXIT_OK


def cmd_topology_validate(args) -> int:
    try:
        text = args.file.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    diags = validate_topology(text)
    for lineno, msg in diags:
        print(f"{args.file}:{lineno}: {msg}", file=sys.stderr)
    if diags:
        return EXIT_RUNTIME
    print(f"{args.file}: ok")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"trustroute: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrustDomainError, TopologyError, RuntimeError) as exc:
        print(f"trustroute: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
