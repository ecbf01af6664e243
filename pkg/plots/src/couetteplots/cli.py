"""Figure CLI: couettelab-plots render --kind <k> --in <csv...> --out <path>.

Exit codes: 0 success, 2 bad input (missing columns, empty CSV, usage).
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, EmptyInput, FigureSpec, MissingColumn, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="couettelab-plots", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render one figure from CSV inputs")
    r.add_argument("--kind", required=True, choices=KINDS)
    r.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="CSV")
    r.add_argument("--out", required=True, help="output path (suffix replaced per format)")
    r.add_argument("--title")
    r.add_argument("--mu", type=float, help="dissipation for decay-guide labelling")
    r.add_argument("--k", dest="k_select", type=int, default=1,
                   help="wavenumber row for weight profiles")
    r.add_argument("--formats", default="pdf,png")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            inputs=tuple(args.inputs),
            kind=args.kind,
            out=args.out,
            title=args.title,
            mu=args.mu,
            k_select=args.k_select,
            formats=tuple(f for f in args.formats.split(",") if f),
        )
        result = render(spec)
    except (MissingColumn, EmptyInput, FileNotFoundError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    for path in result.out_paths:
        print(path)
    if result.label:
        print(result.label)
    return 0


if __name__ == "__main__":
    sys.exit(main())
