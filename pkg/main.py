#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# This file is part of ProfiledSearch, which is released under the GNU General Public License (GPL).
# See the LICENSE or COPYING file in the root of this project or visit
# http://www.gnu.org/licenses/gpl-3.0.html for the full text of the license.

"""
ProfiledSearch
=================================================================

Command line for profiled community search:

    build-index   build the CP-tree index of a graph and write it to a .cpt file
    query         communities of a query vertex, from an index or from graph files
    bench         scalability sweeps over sub-datasets
    gen           write a seeded synthetic profiled graph
    metrics       quality measures of a structured query result

(c) ProfiledSearch, 2024

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU General Public License for more details.

You should have received a copy of the GNU General Public License
along with this program. If not, see <http://www.gnu.org/licenses/>.
"""

__author__ = "Ali Karaoglu"
__version__ = "0.1.0"
__date__ = "2024-06-02"

import argparse
import json
import logging
import sys
from pathlib import Path

from src.Benchmark import SWEEPS, SweepConfig, format_table, run_benchmark, write_plots, write_results
from src.CPTreeIndex import build_index, load_index, save_index
from src.CommunityMetrics import evaluate, read_truth
from src.PCSQuery import ALGORITHMS, DEFAULT_K, QueryConfig, query_classes, run_query
from src.PCSQueryAbstract import ResultSet
from src.ProfiledGraph import generate_graph, load_fixture, load_graph, write_graph
from src.SubtreeAlgebra import leaves

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1; status 2 is kept for bad data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def add_graph_arguments(parser):
    group = parser.add_argument_group("graph input")
    group.add_argument("--edges", help="edge list, one 'u v' per line")
    group.add_argument("--ptrees", help="P-trees, one 'v: id,id,...' per line")
    group.add_argument("--gptree", help="GP-tree, one 'id parent_id name' per line")
    group.add_argument("--names", help="optional vertex names, one 'id name' per line")
    group.add_argument("--fixture", action="store_true", help="use the bundled six-vertex example graph")


def load_input_graph(args):
    if args.fixture:
        return load_fixture()
    missing = [flag for flag in ("edges", "ptrees", "gptree") if getattr(args, flag) is None]
    if missing:
        raise UsageError(f"graph input needs --fixture or all of --edges --ptrees --gptree (missing: "
                         f"{', '.join('--' + m for m in missing)})")
    return load_graph(args.edges, args.ptrees, args.gptree, args.names)


def graph_and_index(args):
    if getattr(args, "index", None):
        idx = load_index(args.index)
        return idx.graph, idx
    g = load_input_graph(args)
    return g, None


def emit(text, out=None):
    if out is None:
        print(text)
    else:
        Path(out).write_text(text + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_build_index(args):
    g = load_input_graph(args)
    idx = build_index(g, compress=args.compress)
    save_index(idx, args.out)
    print(f"built index: {len(idx.nodes)} nodes, {idx.entry_count()} entries, {idx.build_seconds:.3f} s -> {args.out}")
    return EXIT_OK


def format_result(result: ResultSet, g) -> str:
    gp = g.gptree
    lines = []
    for i, c in enumerate(result, start=1):
        members = " ".join(g.vertex_name(v) for v in c.vertices)
        theme = ", ".join(gp.path_name(x) for x in leaves(c.mct, gp)) or "(empty)"
        lines.append(f"community {i}: {members}")
        lines.append(f"  theme: {theme}")
    lines.append("counters: " + " ".join(f"{key}={value}" for key, value in result.counters.as_dict().items()))
    lines.append(f"{len(result)} communities")
    return "\n".join(lines)


def cmd_query(args):
    g, idx = graph_and_index(args)
    config = QueryConfig(args.q, args.k, args.algorithm, args.seed)
    if idx is None and query_classes[config.algorithm].needs_index:
        idx = build_index(g)
    result = run_query(config, g, idx)
    if args.format == "structured":
        emit(json.dumps(result.to_dict(g), indent=2), args.out)
    else:
        emit(format_result(result, g), args.out)
    return EXIT_OK


def cmd_bench(args):
    g = load_input_graph(args)
    config = SweepConfig(sweeps=tuple(args.sweeps), fractions=tuple(args.fractions), k_values=tuple(args.k_values),
                         k=args.k, queries=args.queries, algorithms=tuple(args.algorithms), seed=args.seed,
                         workers=args.workers, compress=args.compress)
    report = run_benchmark(g, config, progress=not args.quiet)
    written = write_results(report, args.out)
    if args.plot:
        written += write_plots(report, args.out)
    print(format_table(report.records, config.algorithms))
    if report.fit is not None:
        print(f"build time fit over {report.fit['sweep']} sweep: r^2={report.fit['r_squared']:.4f}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_gen(args):
    g = generate_graph(args.n, args.m, args.gp_size, args.gp_depth, args.tokens, args.vocab, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_graph(g, out / "edges.txt", out / "ptrees.txt", out / "gptree.txt")
    print(f"wrote graph with n={g.n}, m={g.m}, |GP|={len(g.gptree)} to {out}")
    return EXIT_OK


def read_result(path) -> ResultSet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: not a structured result ({e})") from None
    return ResultSet.from_dict(data)


def cmd_metrics(args):
    g, _ = graph_and_index(args)
    result = read_result(args.result)
    other = read_result(args.other) if args.other else None
    truth = None
    if args.truth:
        with open(args.truth, encoding="utf-8") as f:
            truth = read_truth(f, source=args.truth)
    q = result.q if args.q is None else g.vertex_id(args.q)
    if q is None:
        raise ValueError("the result names no query vertex; pass --q")
    report = evaluate(g, q, result, other, truth)
    if args.format == "structured":
        emit(json.dumps(report.to_dict(), indent=2), args.out)
    else:
        emit(report.to_text(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="main.py", description="Profiled community search")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    p = commands.add_parser("build-index", help="build and save the CP-tree index")
    add_graph_arguments(p)
    p.add_argument("--out", required=True, help="index file to write (.cpt)")
    p.add_argument("--compress", action="store_true", help="share CL-trees between equal label subgraphs")
    p.set_defaults(handler=cmd_build_index)

    p = commands.add_parser("query", help="profiled communities of one vertex")
    add_graph_arguments(p)
    p.add_argument("--index", help="index file written by build-index")
    p.add_argument("--q", required=True, help="query vertex, by id or name")
    p.add_argument("--k", type=int, default=DEFAULT_K, help=f"minimum degree (default {DEFAULT_K})")
    p.add_argument("--algorithm", default="adv-p", type=str.lower, choices=ALGORITHMS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.add_argument("--out", help="write the report to this file instead of stdout")
    p.set_defaults(handler=cmd_query)

    p = commands.add_parser("bench", help="scalability sweeps")
    add_graph_arguments(p)
    p.add_argument("--out", default="bench_output", help="output directory")
    p.add_argument("--sweeps", nargs="+", default=list(SweepConfig.sweeps), type=str.lower, choices=SWEEPS)
    p.add_argument("--fractions", nargs="+", type=float, default=list(SweepConfig.fractions))
    p.add_argument("--k-values", nargs="+", type=int, default=list(SweepConfig.k_values))
    p.add_argument("--k", type=int, default=DEFAULT_K, help="k of the fraction sweeps")
    p.add_argument("--queries", type=int, default=SweepConfig.queries, help="query vertices per cell")
    p.add_argument("--algorithms", nargs="+", type=str.lower, choices=ALGORITHMS,
                   default=list(SweepConfig.algorithms))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="sweep cells run in parallel")
    p.add_argument("--compress", action="store_true")
    p.add_argument("--plot", action="store_true", help="also write bench_build.png and bench_query.png")
    p.add_argument("--quiet", action="store_true", help="no progress bar")
    p.set_defaults(handler=cmd_bench)

    p = commands.add_parser("gen", help="write a synthetic profiled graph")
    p.add_argument("--n", type=int, required=True, help="vertices")
    p.add_argument("--m", type=int, required=True, help="edges")
    p.add_argument("--gp-size", type=int, default=64, help="GP-tree labels")
    p.add_argument("--gp-depth", type=int, default=4, help="GP-tree depth")
    p.add_argument("--tokens", type=int, default=20, help="tokens drawn per vertex")
    p.add_argument("--vocab", type=int, default=500, help="token vocabulary size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_gen)

    p = commands.add_parser("metrics", help="CPS, LDR, CPF and F1 of a structured result")
    add_graph_arguments(p)
    p.add_argument("--index", help="index file written by build-index")
    p.add_argument("--result", required=True, help="structured output of query")
    p.add_argument("--other", help="structured result compared against for LDR")
    p.add_argument("--truth", help="ground-truth circles, one line of vertex ids each")
    p.add_argument("--q", help="query vertex when the result does not name it")
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.add_argument("--out", help="write the report to this file instead of stdout")
    p.set_defaults(handler=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s - %(levelname)s - %(message)s")
    try:
        return args.handler(args)
    except UsageError as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        logger.debug("command failed", exc_info=True)
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
