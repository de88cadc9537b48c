"""Completion-count moments against q for model A (r=2, s=2)."""
import argparse

from algturan.lab import moment_trend

ap = argparse.ArgumentParser()
ap.add_argument("--qs", type=int, nargs="+", default=[3, 5, 7, 11, 13])
ap.add_argument("--exponents", type=int, nargs="+", default=[1, 2, 4])
ap.add_argument("--trials", type=int, default=500)
ap.add_argument("--h", type=int, default=1)
ap.add_argument("--seed", type=int, default=1)
args = ap.parse_args()

print("exponent,q,mean,stderr")
for k in args.exponents:
    for m in moment_trend("A", 2, [2], args.qs, args.h, k, args.trials, args.seed):
        print(f"{k},{m.q},{m.mean:.4f},{m.stderr:.4f}")
