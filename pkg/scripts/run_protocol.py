#!/usr/bin/env python3
"""Paired baseline-vs-localization protocol on seeded benchmark instances.

Generates 10 ER(100, 0.1) independent-set instances and 10 BA(128, 4)
MaxCut instances, runs both arms for each sampler under identical
10000-step budgets across 20 paired seeds, and prints per-sampler means.
"""

import argparse
import collections
import os
import sys

import numpy as np

from bqsl.cli import main as cli_main
from bqsl import bench


def run(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="protocol")
    ap.add_argument("--steps", type=int, default=10000)
    ap.add_argument("--seeds", default="0..19")
    ap.add_argument("--samplers", default="glauber,gradient-mh,dmala")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args(argv)

    os.makedirs(args.out, exist_ok=True)
    mis_dir = os.path.join(args.out, "mis")
    cut_dir = os.path.join(args.out, "maxcut")
    cli_main(["gen", "--kind", "er", "--n", "100", "--p", "0.1", "--count", "10",
              "--seed", "0", "--problem", "mis", "--out", mis_dir])
    cli_main(["gen", "--kind", "ba", "--n", "128", "--m", "4", "--count", "10",
              "--seed", "0", "--problem", "maxcut", "--out", cut_dir])

    csv_path = os.path.join(args.out, "results.csv")
    for d in (mis_dir, cut_dir):
        run_args = ["run", "--manifest", os.path.join(d, "manifest.jsonl"),
                    "--samplers", args.samplers, "--sl", "both",
                    "--steps", str(args.steps), "--seeds", args.seeds,
                    "--out", csv_path]
        if args.workers:
            run_args += ["--workers", str(args.workers)]
        cli_main(run_args)

    by_arm = collections.defaultdict(list)
    for rec in bench.read_records(csv_path):
        by_arm[(rec.sampler_kind, rec.sl_enabled)].append(rec.best_objective)
    for tag in sorted({k for k, _ in by_arm}):
        base = np.mean(by_arm[(tag, False)])
        sl = np.mean(by_arm[(tag, True)])
        print(f"{tag}: baseline {base:.3f}  sl {sl:.3f}  "
              f"rel {100 * (sl - base) / base:+.3f}%")
    return 0


if __name__ == "__main__":
    sys.exit(run())
