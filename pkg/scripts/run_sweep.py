"""Run the bundled 40-vertex sweep and write CSV/SVG outputs.

    python3 scripts/run_sweep.py --out-dir runs/sensor40 [--seed 3] [--quick]
"""

import argparse
import logging
import time
from dataclasses import replace

from signcone.experiment import bundled_config_path, load_config, run_experiment, seed_variant, write_outputs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="runs/sensor40")
    ap.add_argument("--seed", type=int, default=None, help="graph/signal/master seed (default: config's)")
    ap.add_argument("--quick", action="store_true", help="5 sets x 5 inits x 1000 iterations")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    cfg = load_config(bundled_config_path())
    if args.seed is not None:
        cfg = seed_variant(cfg, args.seed)
    if args.quick:
        cfg = replace(cfg, random_sets=5, inits=5, pocs=replace(cfg.pocs, max_iters=1000))
    t0 = time.time()
    report = run_experiment(cfg)
    write_outputs(report, args.out_dir)
    print(f"n={report.n} edges={report.num_edges} B={report.B} ({time.time() - t0:.0f}s)")
    for a in report.aggregates:
        print(f"{a.strategy:7s} rate={a.rate:.2f} M={a.M:2d} mean={a.mean_delta_deg:7.3f} std={a.std_delta_deg:6.3f} collapsed={a.collapsed}")


if __name__ == "__main__":
    main()
