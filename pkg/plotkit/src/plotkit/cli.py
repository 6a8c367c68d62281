"""Command line: ``gateforge-plot <kind> <input.csv> -o <out.png>``."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gateforge-plot",
        description="Render gateforge CSV artifacts into figures.",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("input", help="CSV artifact to plot")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        out = render(PlotSpec(kind=args.kind, input_path=args.input,
                              output_path=args.output, title=args.title))
    except SchemaError as exc:
        print(f"gateforge-plot: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
