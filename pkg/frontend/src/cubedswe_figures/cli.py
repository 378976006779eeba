"""Command-line entry point: render one figure from solver CSV files.

Usage: cubedswe-plot --kind <kind> --in <csv...> --out <png/svg>
Exit codes: 0 success, 1 bad arguments or schema mismatch.
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, RENDERERS, renderer_key
from .schemas import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cubedswe-plot",
        description="Render a figure from cubedswe CSV output files.")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        metavar="CSV", help="input CSV file(s)")
    parser.add_argument("--out", required=True,
                        help="output image path (.png or .svg)")
    parser.add_argument("--field", default=None,
                        help="field column for map kinds "
                        "(default: zeta for sphere-map, H for difference-map)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--log", action="store_true",
                        help="log-scale magnitudes for timeseries")
    parser.add_argument("--renderer-key", action="store_true",
                        help="print the renderer identifier and exit")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    if argv is not None and "--renderer-key" in argv:
        print(renderer_key())
        return 0
    args = parser.parse_args(argv)
    renderer = RENDERERS[args.kind]
    kwargs = {"title": args.title}
    if args.kind == "timeseries":
        kwargs["logscale"] = args.log
    if args.field is not None:
        if args.kind not in ("sphere-map", "difference-map"):
            print("--field applies only to map kinds", file=sys.stderr)
            return 1
        kwargs["field"] = args.field
    try:
        renderer(args.inputs, args.out, **kwargs)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
