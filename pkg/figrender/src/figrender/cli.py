"""Command-line entry point.

Exit codes: 0 all found panels rendered cleanly (missing panels are listed
but not fatal), 1 rendered with warnings (for example a variant with no
finite values), 2 malformed CSV.
"""

from __future__ import annotations

import argparse
import sys

from .panels import SchemaMismatch
from .render import render_all


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render_figs",
        description="Render magnomech sweep CSV panels to image files.",
    )
    parser.add_argument("csv_dir", help="directory holding <panel>.csv files")
    parser.add_argument("--out", default="imgs", help="output directory (default imgs)")
    parser.add_argument(
        "--format",
        choices=("png", "svg"),
        default="png",
        dest="image_format",
        help="image format (default png)",
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else (0 if exc.code is None else 2)
    try:
        report = render_all(args.csv_dir, args.out, args.image_format)
    except SchemaMismatch as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    for panel in report.rendered:
        print(f"rendered {panel}")
    for panel in report.missing:
        print(f"missing {panel}")
    for line in report.warnings:
        sys.stderr.write(f"warning: {line}\n")
    return 1 if report.warnings else 0


if __name__ == "__main__":
    sys.exit(main())
