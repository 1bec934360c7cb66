"""Hypothesis verdicts and lambda^2(m) along the scaled phi^8 family.

    python3 scripts/scan_phi8.py --m 1.5 2 3 5 10 20 --jobs 2
"""
import argparse
import csv
import sys

from kinkstab.config import config_from_dict
from kinkstab.pipeline import SCAN_COLUMNS, scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=float, nargs="+", default=[1.5, 2.0, 3.0, 5.0, 10.0, 20.0])
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    rows = scan(config_from_dict({}), "m", args.m, jobs=args.jobs)
    w = csv.DictWriter(sys.stdout, fieldnames=SCAN_COLUMNS)
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
