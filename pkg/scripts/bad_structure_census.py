"""How many bad structures appear at small thresholds, by model and q.

At desk-scale q the completion counts do not concentrate near zero, so a
fixed small threshold flags a constant fraction of all sequences (pairs).
"""
import argparse

from algturan.construct import params
from algturan.gf import field_of_order
from algturan.lab import expectation_suite

ap = argparse.ArgumentParser()
ap.add_argument("--trials", type=int, default=10)
ap.add_argument("--seed", type=int, default=1)
ap.add_argument("--thresholds", type=int, nargs="+", default=[2, 4, 8, 16])
args = ap.parse_args()

runs = [("A", 2, [2], q) for q in (3, 5, 7)] + [("B", 3, [2], 3)] + [("C", 3, [2], q) for q in (3, 5)]
print("model,q,h,edges,multi," + ",".join(f"bad@{P}" for P in args.thresholds) + ",removed@4,edges_after@4")
for model, r, inputs, q in runs:
    for h in (1, 2):
        p = params(model, r, inputs, q, h=h)
        rep = expectation_suite(p, field_of_order(q), args.trials, args.seed, thresholds=args.thresholds, cleanup_threshold=4)
        agg = rep.aggregate()
        bad = ",".join(f"{agg[f'bad@{P}']['mean']:.1f}" for P in args.thresholds)
        print(
            f"{model},{q},{h},{agg['edges']['mean']:.1f},{agg['multi_edges']['mean']:.1f},{bad},"
            f"{agg['vertices_removed']['mean']:.1f},{agg['edges_after']['mean']:.1f}"
        )
