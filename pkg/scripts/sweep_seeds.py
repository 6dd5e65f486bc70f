"""Repeat the bundled sweep over independent graph/signal seeds and tabulate mean angle errors.

    python3 scripts/sweep_seeds.py --seeds 1 2 3 4 5 --out runs/seeds.csv
"""

import argparse
import csv
import sys

from signcone.experiment import bundled_config_path, load_config, run_experiment, seed_variant


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--out", default=None, help="CSV path (default stdout)")
    args = ap.parse_args()

    base = load_config(bundled_config_path())
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh)
    w.writerow(["seed", "strategy", "rate", "M", "mean_delta_deg", "std_delta_deg", "runs", "collapsed"])
    for seed in args.seeds:
        report = run_experiment(seed_variant(base, seed))
        for a in report.aggregates:
            w.writerow([seed, a.strategy, a.rate, a.M, f"{a.mean_delta_deg:.6f}", f"{a.std_delta_deg:.6f}", a.runs, a.collapsed])
        fh.flush()
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
