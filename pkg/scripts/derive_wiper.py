"""Derive every variant of the wiper product line and print its table plus the IntervalControl of each variant."""

import argparse
import os
import sys

from deltaarc.adl import print_component
from deltaarc.analysis import check_product_line, format_table
from deltaarc.productline import load_product_line

HERE = os.path.dirname(os.path.abspath(__file__))
DEFAULT_CORPUS = os.path.join(HERE, "..", "corpus", "wiper")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("corpus", nargs="?", default=DEFAULT_CORPUS)
    ap.add_argument("--implicit", action="store_true", help="also print connectors created by autoconnect")
    args = ap.parse_args()

    pl = load_product_line([args.corpus])
    rows = check_product_line(pl.library, pl.deltas, pl.feature_model)
    print(format_table(rows))
    for row in rows:
        if row.report.result is None:
            continue
        ic = row.report.result["IntervalControl"]
        print(f"== {row.configuration.label}")
        print(print_component(ic, include_implicit=args.implicit))
    return 0 if all(r.status.value == "OK" for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
