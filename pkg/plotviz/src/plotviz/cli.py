"""pbvf-plot: render pbvf CSV artifacts to PNG figures.

    pbvf-plot curves 'runs/**/curve_*.csv' -o curves.png
    pbvf-plot landscape landscape.csv --traj traj.csv --behav behav.csv -o fig.png
    pbvf-plot oracle oracle.csv -o oracle.png

Globs are expanded here as well as by the shell, so quoted patterns work on
any platform. All rendering is deterministic: same inputs, same bytes.
"""

from __future__ import annotations

import argparse
import glob as globmod
import sys

from .io import PlotDataError


def _expand(patterns: list[str]) -> list[str]:
    paths = []
    for pat in patterns:
        hits = sorted(globmod.glob(pat, recursive=True))
        paths.extend(hits if hits else [pat])
    return paths


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pbvf-plot",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curves", help="learning curves with +-1 std bands")
    c.add_argument("globs", nargs="+",
                   help="curve CSV paths or glob patterns")
    c.add_argument("-o", "--out", required=True, help="output PNG path")

    l = sub.add_parser("landscape",
                       help="true-return vs critic-value heatmaps")
    l.add_argument("grid", help="landscape CSV")
    l.add_argument("--traj", help="optimization trajectory CSV (red arrows)")
    l.add_argument("--behav", help="behavior policy CSV (blue markers)")
    l.add_argument("-o", "--out", required=True, help="output PNG path")

    o = sub.add_parser("oracle", help="gradient-check error bars")
    o.add_argument("csv", help="oracle report CSV")
    o.add_argument("-o", "--out", required=True, help="output PNG path")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "curves":
            from .curves import plot_curves
            info = plot_curves(_expand(args.globs), args.out)
            print(f"wrote {args.out}: {info['panels']} panel(s), "
                  f"{info['summary_rows_checked']} summary row(s) verified")
        elif args.command == "landscape":
            from .landscape import plot_landscape
            info = plot_landscape(args.grid, args.out, traj_path=args.traj,
                                  behav_path=args.behav)
            w, b = info["true_max"]
            print(f"wrote {args.out}: {info['resolution']}x"
                  f"{info['resolution']} grid, true max at ({w:g}, {b:g})")
        else:
            from .oraclefig import plot_oracle
            info = plot_oracle(args.csv, args.out)
            print(f"wrote {args.out}: {info['instances']} instance(s)")
    except PlotDataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
