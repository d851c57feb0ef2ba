"""Time whole-product-line checking on synthetic product lines of growing size.

Optionally writes the generated corpus so it can be fed to the CLI.
"""

import argparse
import time
from collections import Counter

from deltaarc.analysis import check_product_line
from deltaarc.synthetic import synthetic_product_line, write_product_line


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--features", type=int, nargs="+", default=[2, 4, 6, 8, 10])
    ap.add_argument("--deltas", type=int, default=12)
    ap.add_argument("--write", metavar="DIR", help="write the largest product line here")
    args = ap.parse_args()

    print(f"{'features':>8} {'deltas':>6} {'configs':>8} {'seconds':>8}  statuses")
    pl = None
    for n in args.features:
        pl = synthetic_product_line(n, max(args.deltas, n))
        start = time.perf_counter()
        rows = check_product_line(pl.library, pl.deltas, pl.feature_model)
        elapsed = time.perf_counter() - start
        statuses = Counter(r.status.value for r in rows)
        print(f"{n:>8} {len(pl.deltas):>6} {len(rows):>8} {elapsed:>8.2f}  {dict(statuses)}")
    if args.write and pl is not None:
        write_product_line(pl, args.write)
        print(f"wrote {args.write}")


if __name__ == "__main__":
    main()
