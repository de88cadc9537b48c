"""|W| histogram for random sequences in one model A layer, across q."""
import argparse

from algturan.construct import params
from algturan.gf import field_of_order
from algturan.lab import dichotomy_probe

ap = argparse.ArgumentParser()
ap.add_argument("--qs", type=int, nargs="+", default=[5, 9, 13, 25])
ap.add_argument("--trials", type=int, default=2000)
ap.add_argument("--seed", type=int, default=1)
ap.add_argument("--threads", type=int, default=1)
args = ap.parse_args()

for q in args.qs:
    rep = dichotomy_probe(params("A", 2, [2], q), field_of_order(q), args.trials, args.seed, threads=args.threads)
    print(
        f"q={q} cutoff={rep.cutoff} small_cluster_max={rep.small_cluster_max} "
        f"below_max={rep.below_max} above_min={rep.above_min} middle_band={rep.middle_band}"
    )
    print("   ", rep.histogram)
