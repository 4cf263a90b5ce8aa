"""Write every table and figure data set as CSV.

    python scripts/reproduce_tables.py --out-dir results --replicates 1000000
"""

import argparse
import time
from pathlib import Path

from multitrial import tables
from multitrial.simulation import DEFAULT_SEED


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--replicates", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("ids", nargs="*", default=list(tables.TABLE_IDS))
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for table_id in args.ids:
        t0 = time.perf_counter()
        header, rows = tables.build(table_id, args.replicates, args.seed)
        tables.write_csv(out / f"{table_id}.csv", header, rows)
        print(f"{table_id:5s} {len(rows):4d} rows  {time.perf_counter() - t0:6.1f}s")


if __name__ == "__main__":
    main()
