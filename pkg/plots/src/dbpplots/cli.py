"""Standalone figure-rendering script: ``dbp-plot --input ... --kind ... --output ...``."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbp-plot",
        description="Render a figure from a simulator CSV (ber.csv or tradeoff.csv).",
    )
    parser.add_argument("--input", required=True, help="input CSV path")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--output", required=True, help="output image path")
    parser.add_argument("--log-x", dest="log_x", action="store_true", default=None)
    parser.add_argument("--linear-x", dest="log_x", action="store_false")
    parser.add_argument("--log-y", dest="log_y", action="store_true", default=None)
    parser.add_argument("--linear-y", dest="log_y", action="store_false")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        input_csv=args.input,
        kind=args.kind,
        output=args.output,
        log_x=args.log_x,
        log_y=args.log_y,
    )
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


def entry():  # console script
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
