"""figs: render one figure per invocation from solver CSV files."""
import argparse
import sys
from pathlib import Path

from .csv_io import SchemaError
from .render import KINDS, FigureSpec, expand_inputs, render_to_file


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figs",
        description="Render a figure from solver CSV outputs.")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="PATH",
                        help="CSV file or directory to scan; repeatable")
    parser.add_argument("--label", dest="labels", action="append", default=[],
                        help="legend label, one per input in order")
    parser.add_argument("--log-y", action="store_true",
                        help="logarithmic value axis where supported")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        inputs = expand_inputs(args.kind, args.inputs)
        spec = FigureSpec(kind=args.kind, inputs=inputs,
                          out_path=Path(args.out),
                          labels=tuple(args.labels), log_y=args.log_y)
        out = render_to_file(spec)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"figs: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out} ({len(inputs)} input file"
          f"{'s' if len(inputs) != 1 else ''})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
