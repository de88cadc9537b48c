"""Run the acceptance checks and print one line per criterion."""
import argparse
import sys

from algturan.acceptance import run_all

ap = argparse.ArgumentParser()
ap.add_argument("--only", type=int, nargs="*", help="criterion numbers")
ap.add_argument("--threads", type=int, default=1)
args = ap.parse_args()

results = run_all(only=args.only or None, threads=args.threads)
for res in results:
    print(res.line(), flush=True)
sys.exit(0 if all(r.passed for r in results) else 1)
