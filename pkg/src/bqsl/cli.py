"""Command-line front end: instance generation, paired benchmark runs,
the theory-verification suite, the ablation grid, and scaling probes.

Entry point installed as `bqsl`; every subcommand is deterministic under a
fixed seed and writes machine-readable outputs (CSV rows with a JSON config
sidecar, JSONL reports).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .model import ConfigError
from .samplers import (
    DMALA,
    DULA,
    GLAUBER,
    GRADIENT_MH,
    METROPOLIS,
    SamplerKind,
)
from .sl import AlphaSchedule, SlConfig, build_time_grid
from . import bench, exact, qubo

SAMPLER_TAGS = (GLAUBER, METROPOLIS, GRADIENT_MH, DULA, DMALA)


def _parse_seeds(text: str) -> list:
    """'0..19' (inclusive) or '0,3,7'."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def _parse_sampler(token: str) -> SamplerKind:
    token = token.strip()
    if token not in SAMPLER_TAGS:
        raise ConfigError(f"unknown sampler {token!r}; choose from {SAMPLER_TAGS}")
    return SamplerKind(tag=token)


def _parse_schedule(token: str) -> AlphaSchedule:
    token = token.strip()
    if token == "classic":
        return AlphaSchedule(kind="classic")
    if token == "geom11":
        return AlphaSchedule(kind="geom", a1=1.0, a2=1.0)
    if token == "geom21":
        return AlphaSchedule(kind="geom", a1=2.0, a2=1.0)
    if token.startswith("geom:"):
        a1, a2 = (float(v) for v in token[5:].split(","))
        return AlphaSchedule(kind="geom", a1=a1, a2=a2)
    raise ConfigError(f"unknown schedule {token!r}")


def _sl_config_from_args(args) -> SlConfig:
    return SlConfig(
        schedule=_parse_schedule(args.sl_schedule),
        grid=args.sl_grid,
        k=args.sl_k,
        sigma=args.sl_sigma,
        allocation=args.sl_allocation,
        decay_rate=args.sl_decay_rate,
        n_min=args.sl_n_min,
        sample_ratio=args.sl_sample_ratio,
        warm_start=not args.no_warm_start,
    )


def _add_sl_flags(p: argparse.ArgumentParser) -> None:
    d = bench.default_bench_sl()
    p.add_argument("--sl-schedule", default="classic" if d.schedule.kind == "classic" else "geom21")
    p.add_argument("--sl-grid", default=d.grid)
    p.add_argument("--sl-k", type=int, default=d.k)
    p.add_argument("--sl-sigma", type=float, default=d.sigma)
    p.add_argument("--sl-allocation", default=d.allocation)
    p.add_argument("--sl-decay-rate", type=float, default=d.decay_rate)
    p.add_argument("--sl-n-min", type=int, default=d.n_min)
    p.add_argument("--sl-sample-ratio", type=float, default=d.sample_ratio)
    p.add_argument("--no-warm-start", action="store_true")


def _load_instances(manifest_path) -> list:
    entries = qubo.load_manifest(manifest_path)
    return [
        (entry.get("id", os.path.basename(entry["graph"])), qubo.instance_from_manifest(entry))
        for entry in entries
    ]


def cmd_gen(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    entries = []
    for i in range(args.count):
        seed = args.seed + i
        if args.kind == "er":
            graph = qubo.gen_er(args.n, args.p, seed)
            stem = f"er-{args.n}-{args.p}-{seed}"
        elif args.kind == "ba":
            graph = qubo.gen_ba(args.n, args.m, seed)
            stem = f"ba-{args.n}-{args.m}-{seed}"
        else:
            raise ConfigError(f"unknown graph kind {args.kind!r}")
        path = os.path.join(args.out, stem + ".graph")
        qubo.save_graph(graph, path)
        entries.append(
            {
                "id": stem,
                "kind": args.problem,
                "graph": path,
                "lambda": args.lam,
                "c": args.c,
                "beta_schedule": {
                    "start": args.beta_start,
                    "end": args.beta_end,
                    "ramp": args.ramp,
                },
                "seed": seed,
            }
        )
    qubo.save_manifest(entries, os.path.join(args.out, "manifest.jsonl"))
    print(f"wrote {args.count} graphs + manifest to {args.out}")
    return 0


def cmd_run(args) -> int:
    instances = _load_instances(args.manifest)
    samplers = [_parse_sampler(tok) for tok in args.samplers.split(",")]
    seeds = _parse_seeds(args.seeds)
    sl_cfg = _sl_config_from_args(args)
    arms = {"both": ("baseline", "sl"), "on": ("sl",), "off": ("baseline",)}[args.sl]
    jobs = [
        (inst, iid, kind, seed, args.steps, sl_cfg, args.eval_every, arms)
        for iid, inst in instances
        for kind in samplers
        for seed in seeds
    ]
    records = bench.run_many(jobs, workers=args.workers)
    bench.append_records(records, args.out)
    configs = [
        bench.describe_config(inst, iid, kind, args.steps, args.eval_every,
                              sl_cfg if "sl" in arms else None)
        for iid, inst in instances
        for kind in samplers
    ]
    side = bench.write_config_sidecar(configs, args.out)
    print(f"appended {len(records)} rows to {args.out} (config: {side})")
    return 0


def _verify_scale(n_models: int):
    """(tail draws, chernoff posteriors, replicas, max n-grid) scaled down
    for quick smoke runs."""
    if n_models >= 50:
        return 10**6, 3, 200, 4096
    return 10**5, 1, 100, 1024


def _chernoff_posterior(seed):
    from .sl import posterior_model

    rng = np.random.default_rng(seed)
    target = exact.gen_admissible_model(
        6, seed=(seed, 104729), require_all_bounds=False
    )
    y = rng.standard_normal(target.n)
    return posterior_model(target, y, 0.5, AlphaSchedule(kind="classic"), 2.0)


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    failures = []

    reports = exact.run_verification_suite(
        n_models=args.models, seed=args.seed, n_range=(args.min_n, args.max_n)
    )
    bad = exact.suite_violations(reports)
    for rep in bad:
        failures.append(f"{rep['check']} violation on model {rep['model_hash']} ({rep['kind']})")
    print(f"bound suite: {len(reports)} reports, {len(bad)} violations "
          f"[{time.perf_counter() - t0:.1f}s]")
    if args.report:
        exact.write_reports(reports, args.report)
        print(f"  reports -> {args.report}")

    draws, n_posts, replicas, n_max = _verify_scale(args.models)
    points = [
        (0.5, 0.3, AlphaSchedule(kind="classic"), 1.0),
        (1.0, 0.7, AlphaSchedule(kind="classic"), 0.5),
        (0.8, 0.5, AlphaSchedule(kind="geom", a1=2.0, a2=1.0), 1.0),
        (0.2, 0.9, AlphaSchedule(kind="geom", a1=1.0, a2=1.0), 2.0),
        (1.5, 0.6, AlphaSchedule(kind="geom", a1=2.0, a2=1.0), 0.7),
    ]
    tails = exact.tail_mc_check(points, draws, args.seed)
    worst_z = max(abs(rec["z"]) for rec in tails)
    if worst_z > 4.0:
        failures.append(f"tail Monte Carlo off by {worst_z:.2f} standard errors")
    grid = build_time_grid(SlConfig(schedule=AlphaSchedule(kind="geom", a1=2.0, a2=1.0), k=64))
    if not exact.tail_monotone_check(AlphaSchedule(kind="geom", a1=2.0, a2=1.0), grid, 0.5, 1.0):
        failures.append("tail probability not strictly increasing on the late grid")
    print(f"tail checks: worst |z| {worst_z:.2f} over {len(points)} points "
          f"({draws} draws) [{time.perf_counter() - t0:.1f}s]")

    n_grid = [64 * 2**i for i in range(int(math.log2(n_max / 64)) + 1)]
    slopes = []
    for p in range(n_posts):
        post = _chernoff_posterior(args.seed + p)
        slopes.append(
            exact.chernoff_decay_probe(post, SamplerKind(tag=GLAUBER), n_grid, replicas, args.seed + p)
        )
    for s in slopes:
        if not -0.7 <= s <= -0.3:
            failures.append(f"error-decay slope {s:.3f} outside [-0.7, -0.3]")
    print(f"error-decay slopes: {['%.3f' % s for s in slopes]} "
          f"[{time.perf_counter() - t0:.1f}s]")

    if failures:
        for f in failures:
            print("FAIL:", f)
        return 1
    print("all checks passed")
    return 0


def cmd_ablate(args) -> int:
    instances = _load_instances(args.manifest)
    kind = _parse_sampler(args.sampler)
    seeds = _parse_seeds(args.seeds)
    schedules = [s.strip() for s in args.schedules.split(",")]
    grids = [g.strip() for g in args.grids.split(",")]
    allocations = [a.strip() for a in args.allocations.split(",")]
    ks = [int(v) for v in args.ks.split(",")]
    sigmas = [float(v) for v in args.sigmas.split(",")]
    base = bench.default_bench_sl()

    records, cells = [], {}
    for sched in schedules:
        for grid in grids:
            for alloc in allocations:
                for k in ks:
                    for sigma in sigmas:
                        cfg = SlConfig(
                            schedule=_parse_schedule(sched),
                            grid=grid,
                            k=k,
                            sigma=sigma,
                            allocation=alloc,
                            decay_rate=base.decay_rate,
                            n_min=base.n_min,
                            sample_ratio=base.sample_ratio,
                            warm_start=base.warm_start,
                        )
                        cell = f"{sched}/{grid}/{alloc}/K{k}/s{sigma}"
                        vals = []
                        for iid, inst in instances:
                            for seed in seeds:
                                rec = bench.run_sl_arm(
                                    inst, iid, kind, seed, args.steps, cfg, args.eval_every
                                )
                                records.append(rec)
                                vals.append(rec.best_objective)
                        cells[cell] = (float(np.mean(vals)), float(np.std(vals)))
    bench.append_records(records, args.out)
    print(f"{len(records)} rows -> {args.out}")
    width = max(len(c) for c in cells)
    for cell, (mean, std) in sorted(cells.items(), key=lambda kv: -kv[1][0]):
        print(f"{cell:<{width}}  {mean:9.3f} ± {std:.3f}")
    return 0


def cmd_complexity(args) -> int:
    sizes = [int(v) for v in args.sizes.split(",")]
    times = [bench.sl_overhead_probe(n, args.iters, args.seed) for n in sizes]
    slope = float(np.polyfit(np.log(sizes), np.log(times), 1)[0])
    doubled = bench.sl_overhead_probe(sizes[-1], 2 * args.iters, args.seed)
    t_ratio = doubled / times[-1]
    print("overhead seconds:", {n: round(t, 5) for n, t in zip(sizes, times)})
    print(f"overhead log-log slope vs N: {slope:.3f}")
    print(f"overhead ratio when iteration count doubles: {t_ratio:.2f}")

    ratio = None
    if not args.skip_ratio:
        ratio = bench.sl_runtime_ratio(
            n=args.ratio_n, steps=args.ratio_steps, seed=args.seed
        )
        print(f"SL/baseline wallclock ratio at N={args.ratio_n}, "
              f"M={args.ratio_steps}: {ratio:.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(
                {"sizes": sizes, "overhead_s": times, "slope": slope,
                 "double_iters_ratio": t_ratio, "runtime_ratio": ratio},
                fh, indent=2,
            )
    ok = 0.8 <= slope <= 1.3 and (ratio is None or 0.9 <= ratio <= 1.2)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bqsl",
        description="Sampling toolkit for binary quadratic distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate benchmark graphs + manifest")
    p.add_argument("--kind", choices=("er", "ba"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--problem", choices=(qubo.MIS, qubo.MAXCUT, qubo.MAXCLIQUE), default=qubo.MIS)
    p.add_argument("--lam", type=float, default=1.0001)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--beta-start", type=float, default=0.1)
    p.add_argument("--beta-end", type=float, default=5.0)
    p.add_argument("--ramp", choices=(qubo.LINEAR, qubo.GEOMETRIC), default=qubo.LINEAR)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="paired baseline / localization runs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--samplers", default=GLAUBER)
    p.add_argument("--sl", choices=("both", "on", "off"), default="both")
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--seeds", default="0")
    p.add_argument("--eval-every", type=int, default=10)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    _add_sl_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="theory-verification suite")
    p.add_argument("--models", type=int, default=50)
    p.add_argument("--min-n", type=int, default=4)
    p.add_argument("--max-n", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ablate", help="localization hyperparameter grid")
    p.add_argument("--manifest", required=True)
    p.add_argument("--sampler", default=GLAUBER)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--seeds", default="0..3")
    p.add_argument("--eval-every", type=int, default=10)
    p.add_argument("--schedules", default="classic,geom11,geom21")
    p.add_argument("--grids", default="uniform,log-snr")
    p.add_argument("--allocations", default="identical,exp-decay")
    p.add_argument("--ks", default="256,512,1024")
    p.add_argument("--sigmas", default="1.0")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("complexity", help="scaling probes")
    p.add_argument("--sizes", default="256,1024,4096")
    p.add_argument("--iters", type=int, default=64)
    p.add_argument("--ratio-n", type=int, default=1000)
    p.add_argument("--ratio-steps", type=int, default=10000)
    p.add_argument("--skip-ratio", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_complexity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.exit(2, f"error: {exc}\n")
    except OSError as exc:
        parser.exit(2, f"io error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
