#!/usr/bin/env python3
"""Localization hyperparameter grid on a small seeded manifest."""

import argparse
import os
import sys

from bqsl.cli import main as cli_main


def run(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="ablation")
    ap.add_argument("--steps", type=int, default=10000)
    ap.add_argument("--seeds", default="0..3")
    args = ap.parse_args(argv)

    os.makedirs(args.out, exist_ok=True)
    inst = os.path.join(args.out, "instances")
    cli_main(["gen", "--kind", "er", "--n", "100", "--p", "0.1", "--count", "2",
              "--seed", "11", "--problem", "mis", "--out", inst])
    return cli_main(["ablate", "--manifest", os.path.join(inst, "manifest.jsonl"),
                     "--steps", str(args.steps), "--seeds", args.seeds,
                     "--ks", "256,512,1024",
                     "--out", os.path.join(args.out, "grid.csv")])


if __name__ == "__main__":
    sys.exit(run())
