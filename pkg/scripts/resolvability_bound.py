"""Exact S2 of random resolvability sub-codes against the finite-n bound.

Runs ``configs/bounds.json`` and prints the Monte Carlo mean, its standard
error and the bound with its five terms.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from secrecy_lab import cli

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(HERE / "configs" / "bounds.json"))
    ap.add_argument("--out", default="results/bounds")
    args = ap.parse_args()
    code = cli.main(["run", "--config", args.config, "--out", args.out])
    if code:
        return code
    rows = list(csv.DictReader(open(Path(args.out) / "bounds.csv")))
    s2 = np.array([float(r["S2"]) for r in rows])
    se = s2.std(ddof=1) / np.sqrt(s2.size)
    print(f"codes {s2.size}  mean S2 {s2.mean():.5f}  std err {se:.5f}")
    print(f"bound {float(rows[0]['bound']):.6g}  terms " + " ".join(f"{float(rows[0][f'term{i}']):.4g}"
                                                             for i in range(1, 6)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
