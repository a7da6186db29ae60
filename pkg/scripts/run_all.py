"""Run every batch config in ``configs/`` through the CLI driver.

Usage: python3 scripts/run_all.py [--out results] [--jobs N] [--skip prop3 ...]
"""

import argparse
import json
import sys
from pathlib import Path

from secrecy_lab import cli

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--skip", nargs="*", default=[])
    args = ap.parse_args()
    status = 0
    for path in sorted((HERE / "configs").glob("*.json")):
        cfg = json.loads(path.read_text())
        if "experiment" not in cfg or path.stem in args.skip:
            continue
        argv = ["run", "--config", str(path), "--out", str(Path(args.out) / path.stem)]
        if args.jobs:
            argv += ["--jobs", str(args.jobs)]
        code = cli.main(argv)
        print(f"{path.name}: exit {code}")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
