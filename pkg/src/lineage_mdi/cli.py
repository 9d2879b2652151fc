"""Command-line entry point.

Subcommands compose through files only: ``ingest`` writes a snapshot,
``build`` turns a snapshot into graph exports, ``mdi`` and ``analyze``
read the graph exports, ``synth`` fabricates test snapshots. Exit codes:
0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .disruption import DEFAULT_EPSILON, DEFAULT_WINDOWS, mdi_sweep, write_mdi_csv
from .ingest import (
    DumpFormatError,
    FetchError,
    RecordRejected,
    fetch_live,
    read_dump,
    write_snapshot,
)
from .lineage import build_graph, load_graph, write_cleaning_report, write_graph
from .reports import AnalysisConfig, run_analysis
from .synth import generate_snapshot

logger = logging.getLogger(__name__)

ENDPOINT_ENV_VAR = "LINEAGE_MDI_ENDPOINT"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we reserve that
        raise UsageError(message)


def _windows_arg(text: str) -> tuple[int, ...]:
    try:
        windows = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise UsageError(f"bad --windows value {text!r}") from None
    if not windows or any(w <= 0 for w in windows):
        raise UsageError("--windows needs positive day counts")
    return windows


def _boundaries_arg(text: str) -> tuple[str, ...]:
    parts = tuple(p.strip() for p in text.split(",") if p.strip())
    if not parts:
        raise UsageError("--period-boundaries needs at least one date")
    return parts


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lineage-mdi",
        description="Model lineage network reconstruction and disruption analytics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="acquire metadata into a snapshot file")
    p_ingest.add_argument("--source", choices=["api", "dump"], required=True)
    p_ingest.add_argument("--dump-path", help="newline-delimited JSON dump (source=dump)")
    p_ingest.add_argument(
        "--endpoint",
        default=os.environ.get(ENDPOINT_ENV_VAR),
        help=f"model API base URL (source=api; default ${ENDPOINT_ENV_VAR})",
    )
    p_ingest.add_argument("--page-size", type=int, default=100)
    p_ingest.add_argument("--max-records", type=int, default=None)
    p_ingest.add_argument("--rate-limit", type=float, default=None, help="requests per second")
    p_ingest.add_argument("--resume", action="store_true", help="resume from the checkpoint file")
    p_ingest.add_argument("--strictness", choices=["strict", "lenient"], default="strict")
    p_ingest.add_argument("--out", required=True, help="snapshot output path")

    p_build = sub.add_parser("build", help="build the lineage graph from a snapshot")
    p_build.add_argument("--snapshot", required=True)
    p_build.add_argument("--out-dir", required=True)

    p_mdi = sub.add_parser("mdi", help="disruption scores only, as CSV")
    p_mdi.add_argument("--graph-dir", required=True, help="directory holding build outputs")
    p_mdi.add_argument("--windows", type=_windows_arg, default=DEFAULT_WINDOWS)
    p_mdi.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p_mdi.add_argument("--include-ineligible", action="store_true")
    p_mdi.add_argument("--workers", type=int, default=1)
    p_mdi.add_argument("--out", required=True)

    p_analyze = sub.add_parser(
        "analyze", aliases=["report"], help="full structural/disruption/temporal report"
    )
    p_analyze.add_argument("--graph-dir", required=True)
    p_analyze.add_argument("--windows", type=_windows_arg, default=DEFAULT_WINDOWS)
    p_analyze.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p_analyze.add_argument("--main-window", type=int, default=90)
    p_analyze.add_argument(
        "--period-boundaries",
        type=_boundaries_arg,
        default=("2023-03-01", "2024-04-01", "2025-04-01"),
    )
    p_analyze.add_argument("--lowess-frac", type=float, default=0.3)
    p_analyze.add_argument("--robust-iters", type=int, default=2)
    p_analyze.add_argument("--bins", type=int, default=40)
    p_analyze.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p_analyze.add_argument("--out-dir", required=True)

    p_synth = sub.add_parser("synth", help="generate a seeded synthetic snapshot")
    p_synth.add_argument("--nodes", type=int, required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument(
        "--attachment", choices=["preferential", "uniform"], default="preferential"
    )
    p_synth.add_argument("--base-fraction", type=float, default=0.05)
    p_synth.add_argument(
        "--mean-gap-hours", type=float, default=6.0,
        help="mean spacing between consecutive release timestamps",
    )
    p_synth.add_argument("--out", required=True)

    return parser


def _graph_paths(graph_dir: Path) -> tuple[Path, Path]:
    return graph_dir / "edges.tsv", graph_dir / "nodes.tsv"


def _cmd_ingest(args) -> int:
    if args.source == "dump":
        if not args.dump_path:
            raise UsageError("--dump-path is required with --source dump")
        snapshot = read_dump(
            args.dump_path, strictness=args.strictness, max_records=args.max_records
        )
    else:
        if not args.endpoint:
            raise UsageError(
                f"--endpoint or ${ENDPOINT_ENV_VAR} is required with --source api"
            )
        checkpoint = Path(str(args.out) + ".checkpoint")
        if not args.resume and checkpoint.exists():
            checkpoint.unlink()  # start fresh unless asked to resume
        snapshot = fetch_live(
            args.endpoint,
            page_size=args.page_size,
            rate_limit=args.rate_limit,
            max_records=args.max_records,
            checkpoint_path=checkpoint,
        )
        checkpoint.unlink(missing_ok=True)
    write_snapshot(snapshot, args.out)
    logger.info("wrote %d records to %s", len(snapshot), args.out)
    print(f"snapshot: {len(snapshot)} records -> {args.out}")
    return EXIT_OK


def _cmd_build(args) -> int:
    snapshot = read_dump(args.snapshot, strictness="strict")
    if not snapshot.records:
        logger.warning("snapshot %s is empty", args.snapshot)
    graph, report = build_graph(snapshot)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    edges_path, nodes_path = _graph_paths(out_dir)
    write_graph(graph, edges_path, nodes_path)
    write_cleaning_report(report, out_dir / "cleaning_report.json")
    print(
        f"graph: {report.final_nodes} nodes, {report.final_edges} edges "
        f"({report.dropped_total()} links dropped) -> {out_dir}"
    )
    return EXIT_OK


def _load_graph_dir(graph_dir: str):
    edges_path, nodes_path = _graph_paths(Path(graph_dir))
    if not edges_path.exists() or not nodes_path.exists():
        raise FileNotFoundError(f"{graph_dir} does not contain edges.tsv/nodes.tsv")
    return load_graph(edges_path, nodes_path)


def _cmd_mdi(args) -> int:
    graph = _load_graph_dir(args.graph_dir)
    results = mdi_sweep(
        graph,
        windows=args.windows,
        epsilon=args.epsilon,
        include_ineligible=args.include_ineligible,
        workers=args.workers,
    )
    write_mdi_csv(results, args.out)
    print(f"mdi: {len(results)} rows -> {args.out}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    graph = _load_graph_dir(args.graph_dir)
    config = AnalysisConfig(
        windows=args.windows,
        epsilon=args.epsilon,
        main_window=args.main_window,
        period_boundaries=args.period_boundaries,
        lowess_frac=args.lowess_frac,
        robust_iters=args.robust_iters,
        bins=args.bins,
        workers=args.workers,
        inputs={"graph_dir": str(args.graph_dir)},
    )
    bundle = run_analysis(graph, config, args.out_dir)
    print(
        f"report: {bundle['census']['nodes']} nodes, "
        f"{bundle['mdi']['eligible_count']} scored models -> {args.out_dir}"
    )
    return EXIT_OK


def _cmd_synth(args) -> int:
    if args.nodes < 0:
        raise UsageError("--nodes must be non-negative")
    snapshot = generate_snapshot(
        args.nodes,
        seed=args.seed,
        attachment=args.attachment,
        base_fraction=args.base_fraction,
        mean_gap_hours=args.mean_gap_hours,
    )
    write_snapshot(snapshot, args.out)
    print(f"synth: {len(snapshot)} records -> {args.out}")
    return EXIT_OK


_HANDLERS = {
    "ingest": _cmd_ingest,
    "build": _cmd_build,
    "mdi": _cmd_mdi,
    "analyze": _cmd_analyze,
    "report": _cmd_analyze,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        FileNotFoundError,
        PermissionError,
        DumpFormatError,
        RecordRejected,
        FetchError,
        json.JSONDecodeError,
        ValueError,
    ) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
