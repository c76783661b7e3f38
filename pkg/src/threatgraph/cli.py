"""Command-line entry point.

Subcommands: ingest, analyze, pairs, experiment, grid. Exit codes: 0 on
success, 1 on usage errors, 2 on data errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import analytics, features, harness, ingest
from .errors import ThreatGraphError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_graph(path):
    graph, report = ingest.load_graph(
        ingest.load_files(ingest.SourceKind.CANONICAL_JSONL, [path])
    )
    if report.dangling_edges:
        print(
            f"warning: {report.dangling_edges} dangling edges ignored",
            file=sys.stderr,
        )
    return graph


def _cmd_ingest(args):
    kind = {k.value: k for k in ingest.SourceKind}[args.kind]
    streams = ingest.load_files(kind, args.files)
    graph, report = ingest.load_graph(streams)
    with open(args.out, "w") as fh:
        fh.write(ingest.export_canonical(graph))
    print(
        f"nodes={report.nodes_added} edges={report.edges_added} "
        f"dangling={report.dangling_edges} merged={report.duplicates_merged}"
    )
    return EXIT_OK


def _cmd_analyze(args):
    graph = _load_graph(args.graph)
    if args.report == "top-cwe":
        with open(args.roots) as fh:
            roots = [line.strip() for line in fh if line.strip()]
        reports = analytics.write_weakness_reports(graph, roots, args.out)
        print(f"wrote {len(reports)} weakness rows to {args.out}")
    else:  # connectivity
        stats = analytics.connectivity_stats(graph)
        print(
            f"techniques={stats.n_techniques} attack_patterns={stats.n_attack_patterns} "
            f"possible={stats.possible_pairs} linked={stats.linked_pairs} "
            f"density={analytics.format_density(stats)} "
            f"unlinked_techniques={stats.pct_unlinked_techniques:.1f}%"
        )
    return EXIT_OK


def _cmd_pairs(args):
    graph = _load_graph(args.graph)
    pairs = features.build_pairs(graph, args.seed)
    features.export_pairs_csv(pairs, args.out)
    print(f"wrote {len(pairs)} pairs to {args.out}")
    return EXIT_OK


def _cmd_experiment(args):
    graph = _load_graph(args.graph)
    config = harness.config_from_name(
        args.name,
        trials=args.trials,
        master_seed=args.seed,
        fixed_negatives=args.fixed_negatives,
        leaky_capec_techniques=args.leaky_capec_techniques,
        embeddings_path=args.embeddings,
    )
    summary = harness.run_experiment(config, graph)
    paths = harness.emit_results([summary], args.out)
    print(
        f"{summary.name}: mean_error={summary.mean_error:.3f} "
        f"mean_auc={summary.mean_auc:.3f} mean_f1={summary.mean_f1:.3f}"
    )
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_grid(args):
    graph = _load_graph(args.graph)
    configs = harness.load_grid(args.config)
    if args.seed is not None:
        from dataclasses import replace

        configs = [replace(cfg, master_seed=args.seed) for cfg in configs]
    summaries, significance = harness.run_grid(configs, graph)
    paths = harness.emit_results(summaries, args.out, significance)
    for summary in sorted(summaries, key=lambda s: (-s.mean_f1, s.name)):
        print(
            f"{summary.name}: mean_error={summary.mean_error:.3f} "
            f"mean_auc={summary.mean_auc:.3f} mean_f1={summary.mean_f1:.3f}"
        )
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="threatgraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse source files into a canonical graph")
    p.add_argument(
        "--kind",
        required=True,
        choices=[k.value for k in ingest.SourceKind],
        help="source format of the input files",
    )
    p.add_argument("files", nargs="+", help="input files of the given kind")
    p.add_argument("--out", required=True, help="canonical JSONL output path")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("analyze", help="graph statistics and reports")
    p.add_argument("report", choices=["top-cwe", "connectivity"])
    p.add_argument("--graph", required=True, help="canonical JSONL graph file")
    p.add_argument("--roots", help="file with one CWE id per line (top-cwe)")
    p.add_argument("--out", help="CSV output path (top-cwe)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("pairs", help="export a balanced labeled pair dataset")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=_cmd_pairs)

    p = sub.add_parser("experiment", help="run one experiment configuration")
    p.add_argument("--name", required=True, help="e.g. CWE-TACTIC-BOW-RANDOM_FOREST")
    p.add_argument("--graph", required=True)
    p.add_argument("--trials", type=int, default=harness.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--embeddings", help="CSV of imported embedding vectors")
    p.add_argument(
        "--fixed-negatives",
        action="store_true",
        help="freeze one negative sample across trials instead of resampling",
    )
    p.add_argument(
        "--leaky-capec-techniques",
        action="store_true",
        help="keep the paired technique's name in the other-techniques feature",
    )
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("grid", help="run a grid of experiments with significance tests")
    p.add_argument("--config", required=True, help="grid.json (array of experiments)")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=None, help="override every master seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_grid)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    if args.command == "analyze" and args.report == "top-cwe":
        if not args.roots or not args.out:
            print("analyze top-cwe requires --roots and --out", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except (ThreatGraphError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
