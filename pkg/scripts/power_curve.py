"""Empirical detection rate of the rotation shift versus events per stage.

Compares the fraction of seeded repetitions reaching the z threshold with
the normal-approximation power computed from the expected separation.

    python3 scripts/power_curve.py --reps 1000
"""

import argparse
import math
from statistics import NormalDist

from mmentangle import analysis
from mmentangle.montecarlo import RngPolicy, simulate_batch

P_BEFORE, P_AFTER = 0.5, 0.25


def normal_power(n: int, sigma: float) -> float:
    sd = math.sqrt((P_BEFORE * (1 - P_BEFORE) + P_AFTER * (1 - P_AFTER)) / n)
    return 1 - NormalDist().cdf(sigma - (P_BEFORE - P_AFTER) / sd)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--sigma", type=float, default=5.0)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 175, 250, 300, 350, 500])
    args = ap.parse_args()

    n_req = analysis.required_n_per_arm(P_BEFORE, P_AFTER, args.sigma)
    print(f"required_n_per_arm = {n_req} (post-selected pairs per stage)")
    print("   n  detected  normal-approx")
    for n in args.sizes:
        hits = 0
        for s in range(args.reps):
            rng = RngPolicy(s)
            before = simulate_batch(2 * n, math.pi / 2, rng, point=0)
            after = simulate_batch(2 * n, math.pi / 2 + math.pi / 6, rng, point=1)
            hits += analysis.two_proportion_z(before, after, args.sigma).significant
        print(f"{n:4d}  {hits / args.reps:8.3f}  {normal_power(n, args.sigma):13.3f}")


if __name__ == "__main__":
    main()
