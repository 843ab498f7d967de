"""plots - render figures from analysis CSVs.

    plots loss <loss_curve_csv...> -o out.png
    plots landscape <landscape_csv> -o out.png
    plots maps <map_csv...> -o out.png

Exit codes: 0 success, 1 bad input (message on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .render import SchemaError, plot_landscape, plot_loss, plot_maps


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    lo = sub.add_parser("loss", help="degradation-loss panels with reference diagonal")
    lo.add_argument("csv", nargs="+")
    lo.add_argument("-o", "--output", required=True)

    la = sub.add_parser("landscape", help="composition landscape heatmap")
    la.add_argument("csv")
    la.add_argument("-o", "--output", required=True)

    mp = sub.add_parser("maps", help="categorical allocation rasters")
    mp.add_argument("csv", nargs="+")
    mp.add_argument("-o", "--output", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "loss":
            out = plot_loss(args.csv, args.output)
        elif args.command == "landscape":
            out = plot_landscape(args.csv, args.output)
        else:
            out = plot_maps(args.csv, args.output)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
