"""Command line: render one sweep CSV to an image.

    uwisac-plot --in case2_spfsk_like.csv --kind position_map --out map.png
"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotSpec, render
from .schema import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="uwisac-plot",
        description="Render sweep CSV outputs as figures")
    parser.add_argument("--in", dest="input_csv", required=True,
                        help="input CSV (sweep schema)")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--scale", choices=("linear", "log"), default="linear")
    args = parser.parse_args(argv)
    try:
        result = render(PlotSpec(input_csv=args.input_csv, kind=args.kind,
                                 output=args.out, scale=args.scale))
    except (SchemaError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(f"wrote {result.path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
