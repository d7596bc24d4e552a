"""Command line entry: one image per invocation.

    gqmc-plots fig1 --csv out/wce.csv --out fig1.png
    gqmc-plots fig2 --csv out/covering.csv --out fig2.png
"""

from __future__ import annotations

import argparse
import sys

from .records import SchemaError
from .render import PlotSpec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gqmc-plots", description=__doc__)
    sub = parser.add_subparsers(dest="which", required=True)
    for name in ("fig1", "fig2"):
        p = sub.add_parser(name)
        p.add_argument("--csv", required=True, help="experiment CSV to read")
        p.add_argument("--out", required=True, help="image file to write")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    spec = PlotSpec.fig1(args.csv, args.out) if args.which == "fig1" else PlotSpec.fig2(args.csv, args.out)
    try:
        path = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
