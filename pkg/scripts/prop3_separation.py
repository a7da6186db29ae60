"""Capacity-based versus resolvability-based codes on BSC(0.05)/BSC(0.25).

Runs ``configs/prop3.json`` (or a config given on the command line) and
prints per-blocklength medians of S2 and S4 for both constructions.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from secrecy_lab import cli

HERE = Path(__file__).resolve().parent


def summarize(csv_path):
    rows = list(csv.DictReader(open(csv_path)))
    ns = sorted({int(r["n"]) for r in rows})
    print(f"{'n':>4} {'cap S2':>10} {'cap S4':>10} {'res S2':>10} {'res S4':>10} {'min slack':>10}")
    for n in ns:
        sel = [r for r in rows if int(r["n"]) == n]

        def med(col):
            return float(np.median([float(r[col]) for r in sel]))

        slack = min(float(r[c]) for r in sel for c in r if "tradeoff_slack" in c)
        print(f"{n:>4} {med('cap_S2'):>10.4f} {med('cap_S4'):>10.4f} {med('res_S2'):>10.4f} "
              f"{med('res_S4'):>10.4f} {slack:>10.4f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(HERE / "configs" / "prop3.json"))
    ap.add_argument("--out", default="results/prop3")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    code = cli.main(["run", "--config", args.config, "--out", args.out, "--jobs", str(args.jobs)])
    if code == 0:
        summarize(Path(args.out) / "prop3.csv")
    return code


if __name__ == "__main__":
    sys.exit(main())
