"""figkit command line: render a powersense CSV into a figure."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figkit", description="Plot powersense CSV results")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render one CSV into one image")
    r.add_argument("--in", dest="input_csv", required=True, help="input CSV path")
    r.add_argument("--kind", required=True, choices=KINDS, help="figure kind")
    r.add_argument("--out", dest="output_path", required=True, help="output image path")
    r.add_argument("--title", help="figure title override")
    r.add_argument("--xlabel", help="x axis label override")
    r.add_argument("--ylabel", help="y axis label override")
    r.add_argument("--metric", default="p_d", help="column to plot for sweep_lines")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        input_csv=args.input_csv,
        kind=args.kind,
        output_path=args.output_path,
        title=args.title,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
        metric=args.metric,
    )
    try:
        report = render(spec)
    except (SchemaError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"wrote {report.output_path} ({report.series} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
