"""Slope spread of the default grid across master seeds.

Used to judge how much of the [-1, -0.4] slope band is seed noise.

    python3 scripts/pilot_bands.py --seeds 1 2 3 4 5
"""

import argparse

from ascifit.harness import SimConfig, rate_check_all, run_grid, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--parallelism", type=int, default=None)
    args = ap.parse_args()

    for seed in args.seeds:
        cfg = SimConfig(master_seed=seed, reps=args.reps, parallelism=args.parallelism)
        fits = rate_check_all(summarize(run_grid(cfg)))
        slopes = "  ".join(f"sigma={f.sigma}: {f.slope:+.3f}" for f in fits)
        inside = all(-1.0 <= f.slope <= -0.4 for f in fits)
        print(f"seed {seed}: {slopes}  {'in band' if inside else 'OUT OF BAND'}")


if __name__ == "__main__":
    main()
