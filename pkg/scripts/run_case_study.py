"""Train the learned auction on wpcn valuation profiles and compare with second price.

Writes the same files as ``semalloc simulate`` and prints the revenue trace
every ``--every`` iterations plus the held-out comparison.
"""

import argparse
import csv
import sys
from pathlib import Path

from semalloc.cli import main as cli_main


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--config", help="TOML config (default: packaged default)")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--iters", type=int)
    p.add_argument("--out", default="out/case_study")
    p.add_argument("--every", type=int, default=200)
    args = p.parse_args(argv)

    cmd = ["simulate", "--seed", str(args.seed), "--out", args.out]
    if args.config:
        cmd += ["--config", args.config]
    if args.iters:
        cmd += ["--iters", str(args.iters)]
    rc = cli_main(cmd)
    if rc:
        return rc
    with open(Path(args.out) / "revenue_trace.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"{'iteration':>9}  {'learned':>10}  {'second price':>12}")
    for row in rows[:: args.every] + rows[-1:]:
        print(f"{row['iteration']:>9}  {row['dl_revenue']:>10}  {row['spa_revenue']:>12}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
