"""Command-line figure rendering from a report bundle.

Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 internal
error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bundle import FIGURE_KINDS, SchemaError
from .render import FigureSpec, render


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lineage-mdi-figures",
        description="Render publication figures from an analysis report bundle",
    )
    parser.add_argument("kind", choices=FIGURE_KINDS, help="figure kind to render")
    parser.add_argument("--bundle", required=True, help="report bundle JSON path")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--width", type=float, default=8.0, help="inches")
    parser.add_argument("--height", type=float, default=5.0, help="inches")
    parser.add_argument("--dpi", type=int, default=100)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        spec = FigureSpec(
            kind=args.kind,
            bundle_path=args.bundle,
            out_path=args.out,
            width=args.width,
            height=args.height,
            dpi=args.dpi,
        )
        out = render(spec)
        print(f"{args.kind} -> {out}")
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, PermissionError, SchemaError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
