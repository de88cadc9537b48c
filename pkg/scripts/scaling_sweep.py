"""Post-cleanup edge counts against n, for a range of h and thresholds.

Prints one CSV row per (model, h, threshold, q) and the fitted slope per group.
"""
import argparse

from algturan.lab import scaling_fit

ap = argparse.ArgumentParser()
ap.add_argument("--trials", type=int, default=20)
ap.add_argument("--seed", type=int, default=1)
ap.add_argument("--hs", type=int, nargs="+", default=[1, 2])
ap.add_argument("--thresholds", type=int, nargs="*", default=[], help="fixed thresholds; the degree bound is always run")
ap.add_argument("--threads", type=int, default=1)
args = ap.parse_args()

runs = [("A", 2, [2], [3, 5, 7, 11, 13]), ("C", 3, [2], [3, 5, 7])]
print("model,h,threshold,q,n,mean_edges_after,stderr")
for model, r, inputs, qs in runs:
    for h in args.hs:
        for P in [None, *args.thresholds]:
            res = scaling_fit(model, r, inputs, qs, h, args.trials, args.seed, threshold=P, threads=args.threads)
            for pt in res.points:
                print(f"{model},{h},{pt['threshold']},{pt['q']},{pt['n']},{pt['mean_edges_after']:.3f},{pt['stderr']:.3f}")
            print(f"# {model} h={h} threshold={'degree' if P is None else P}: slope {res.slope:.3f} (target {res.target})")
