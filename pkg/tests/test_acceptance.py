"""Acceptance gate: one test per primary criterion, each printing a single
pass/fail line with its measured quantities."""

import time

import numpy as np
import pytest

from bqsl.model import BqdModel
from bqsl.samplers import (
    DMALA,
    GLAUBER,
    GRADIENT_MH,
    METROPOLIS,
    SamplerKind,
)
from bqsl.sl import (
    AlphaSchedule,
    SlConfig,
    allocate_steps,
    build_time_grid,
    posterior_model,
    sl_run,
    sl_run_ensemble,
)
from bqsl.exact import (
    chernoff_decay_probe,
    exact_distribution,
    exact_kernel,
    gen_admissible_model,
    run_verification_suite,
    tail_mc_check,
    tail_monotone_check,
)
from bqsl import bench, qubo


def _report(name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" :: {detail}"
    print("\n" + line)
    assert ok, line


@pytest.fixture(scope="module")
def bound_suite():
    t0 = time.perf_counter()
    reports = run_verification_suite(n_models=50, seed=0, n_range=(4, 8))
    return reports, time.perf_counter() - t0


def test_criterion_poincare_bounds(bound_suite):
    reports, elapsed = bound_suite
    poin = [r for r in reports if r["check"] == "poincare"]
    bad = [r for r in poin if r["verdict"] != "ok"]
    _report(
        "variance-bound suite (50 models x 4 dynamics)",
        len(poin) == 200 and not bad and elapsed < 60.0,
        f"{len(poin)} checks, {len(bad)} violations, {elapsed:.1f}s (< 60s)",
    )


def test_criterion_dobrushin_chain(bound_suite):
    reports, elapsed = bound_suite
    dob = [r for r in reports if r["check"] == "dobrushin"]
    bad = [r for r in dob if r["verdict"] != "ok"]
    _report(
        "interdependence-coefficient suite (50 models x 4 dynamics)",
        len(dob) == 200 and not bad and elapsed < 60.0,
        f"{len(dob)} checks, {len(bad)} violations, {elapsed:.1f}s (< 60s)",
    )


def test_criterion_kernel_correctness():
    kinds = (
        SamplerKind(tag=GLAUBER),
        SamplerKind(tag=METROPOLIS),
        SamplerKind(tag=GRADIENT_MH),
        SamplerKind(tag=DMALA),
    )
    worst_stat, worst_rev = 0.0, 0.0
    for m_idx in range(20):
        rng = np.random.default_rng(1000 + m_idx)
        n = 4 + m_idx % 5
        w = rng.normal(0, 0.7, (n, n))
        w = 0.5 * (w + w.T)
        model = BqdModel.from_dense(w, 0.5 * rng.standard_normal(n), 0.9)
        probs = exact_distribution(model).probs
        for kind in kinds:
            p = exact_kernel(model, kind).p
            worst_stat = max(worst_stat, float(np.max(np.abs(probs @ p - probs))))
            flux = probs[:, None] * p
            worst_rev = max(worst_rev, float(np.max(np.abs(flux - flux.T))))
    _report(
        "kernel correctness (20 models, 4 reversible kernels)",
        worst_stat <= 1e-10 and worst_rev <= 1e-10,
        f"max stationarity gap {worst_stat:.2e}, max balance gap {worst_rev:.2e} (<= 1e-10)",
    )


def test_criterion_observation_tail():
    points = [
        (0.5, 0.3, AlphaSchedule(kind="classic"), 1.0),
        (1.0, 0.7, AlphaSchedule(kind="classic"), 0.5),
        (0.8, 0.5, AlphaSchedule(kind="geom", a1=2.0, a2=1.0), 1.0),
        (0.2, 0.9, AlphaSchedule(kind="geom", a1=1.0, a2=1.0), 2.0),
        (1.5, 0.6, AlphaSchedule(kind="geom", a1=2.0, a2=1.0), 0.7),
    ]
    recs = tail_mc_check(points, 10**6, 2024)
    worst = max(abs(r["z"]) for r in recs)
    sched = AlphaSchedule(kind="geom", a1=2.0, a2=1.0)
    grid = build_time_grid(SlConfig(schedule=sched, k=64))
    monotone = tail_monotone_check(sched, grid, 0.5, 1.0)
    _report(
        "observation-process tails (1e6 draws x 5 points + late-grid trend)",
        worst <= 4.0 and monotone,
        f"worst |z| {worst:.2f} (<= 4), strictly increasing late tail: {monotone}",
    )


def test_criterion_end_to_end_sampling():
    rng = np.random.default_rng(7)
    n = 6
    w = rng.normal(0, 0.6, (n, n))
    w = 0.5 * (w + w.T)
    target = BqdModel.from_dense(w, 0.3 * rng.standard_normal(n), 1.0)
    probs = exact_distribution(target).probs

    def tv(samples):
        bits = ((samples > 0).astype(np.int64) * (1 << np.arange(n))).sum(axis=1)
        emp = np.bincount(bits, minlength=2**n) / len(samples)
        return 0.5 * float(np.abs(emp - probs).sum())

    t0 = time.perf_counter()
    tv_short = tv(sl_run_ensemble(target, SlConfig(k=64, total_mcmc=20_000), 5000, 123))
    tv_long = tv(sl_run_ensemble(target, SlConfig(k=64, total_mcmc=100_000), 5000, 124))
    elapsed = time.perf_counter() - t0
    _report(
        "end-to-end localization sampling (N=6, K=64, 5000 replicas)",
        tv_short <= 0.15 and tv_long <= 0.08 and elapsed < 600.0,
        f"TV {tv_short:.3f} (<= 0.15) at 20k steps, {tv_long:.3f} (<= 0.08) "
        f"at 100k steps, {elapsed:.0f}s (< 600s)",
    )


def test_criterion_error_decay_slope():
    slopes = []
    for p in range(3):
        rng = np.random.default_rng(p)
        target = gen_admissible_model(6, seed=(p, 104729), require_all_bounds=False)
        post = posterior_model(
            target, rng.standard_normal(target.n), 0.5, AlphaSchedule(kind="classic"), 2.0
        )
        slopes.append(
            chernoff_decay_probe(
                post,
                SamplerKind(tag=GLAUBER),
                [64, 128, 256, 512, 1024, 2048, 4096],
                200,
                p,
            )
        )
    ok = all(-0.7 <= s <= -0.3 for s in slopes)
    _report(
        "posterior-mean error decay (3 posteriors, 200 replicas)",
        ok,
        "slopes " + ", ".join(f"{s:.3f}" for s in slopes) + " (in [-0.7, -0.3])",
    )


def test_criterion_budget_allocation():
    rng = np.random.default_rng(99)
    exact_sums = True
    monotone = True
    for _ in range(1000):
        k = int(rng.integers(1, 65))
        n_min = int(rng.integers(1, 9))
        total = k * n_min + int(rng.integers(0, 5001))
        rate = float(rng.uniform(0.05, 0.95))
        for allocation in ("identical", "exp-decay"):
            cfg = SlConfig(
                k=k, total_mcmc=total, allocation=allocation,
                decay_rate=rate, n_min=n_min,
            )
            steps = allocate_steps(total, k, cfg)
            exact_sums &= int(steps.sum()) == total
            if allocation == "exp-decay":
                monotone &= bool(np.all(np.diff(steps) <= 0))
    rng2 = np.random.default_rng(5)
    w = rng2.normal(0, 0.5, (5, 5))
    w = 0.5 * (w + w.T)
    model = BqdModel.from_dense(w, 0.3 * rng2.standard_normal(5), 1.0)
    _, trace = sl_run(model, SamplerKind(tag=GLAUBER), SlConfig(k=16, total_mcmc=1234), 0)
    used = sum(r["mcmc_steps_used"] for r in trace.records)
    _report(
        "budget and allocation (1000 random tuples + trace audit)",
        exact_sums and monotone and used == 1234,
        f"exact sums: {exact_sums}, decay monotone: {monotone}, "
        f"trace consumed {used}/1234",
    )


def test_criterion_protocol_reproduction():
    t0 = time.perf_counter()
    instances = [
        (f"er-{i}", qubo.QuboInstance(graph=qubo.gen_er(100, 0.1, i), kind=qubo.MIS))
        for i in range(10)
    ] + [
        (f"ba-{i}", qubo.QuboInstance(graph=qubo.gen_ba(128, 4, i), kind=qubo.MAXCUT))
        for i in range(10)
    ]
    kinds = (
        SamplerKind(tag=GRADIENT_MH),
        SamplerKind(tag=DMALA),
        SamplerKind(tag=GLAUBER),
    )
    sl_cfg = bench.default_bench_sl()
    passing, details = 0, []
    for kind in kinds:
        base_vals, sl_vals = [], []
        for iid, inst in instances:
            for seed in range(20):
                base, sl = bench.run_pair(inst, iid, kind, seed, 10_000, sl_cfg)
                base_vals.append(base.best_objective)
                sl_vals.append(sl.best_objective)
        bm, sm = float(np.mean(base_vals)), float(np.mean(sl_vals))
        ok = sm >= bm * (1.0 - 0.005)
        passing += ok
        details.append(f"{kind.tag}: sl {sm:.2f} vs base {bm:.2f} "
                       f"({100 * (sm - bm) / bm:+.2f}%) {'ok' if ok else 'short'}")
    elapsed = time.perf_counter() - t0
    _report(
        "paired protocol at desk scale (20 instances x 20 seeds x 3 samplers)",
        passing >= 2 and elapsed < 1800.0,
        "; ".join(details) + f"; {passing}/3 within -0.5%, {elapsed:.0f}s (< 1800s)",
    )


def test_criterion_complexity_shape():
    sizes = [256, 1024, 4096]
    times = [bench.sl_overhead_probe(n, 64, 0) for n in sizes]
    slope = float(np.polyfit(np.log(sizes), np.log(times), 1)[0])
    ratio = bench.sl_runtime_ratio(n=1000, steps=10_000, seed=0)
    _report(
        "complexity shape (overhead slope + equal-budget runtime ratio)",
        0.8 <= slope <= 1.3 and 0.9 <= ratio <= 1.2,
        f"overhead slope {slope:.2f} (in [0.8, 1.3]), "
        f"SL/baseline ratio {ratio:.2f} (in [0.9, 1.2])",
    )


def test_criterion_determinism(tmp_path):
    from bqsl.cli import main

    gen_dir = str(tmp_path / "inst")
    main(["gen", "--kind", "er", "--n", "30", "--p", "0.15", "--count", "2",
          "--seed", "3", "--out", gen_dir])
    run_args = ["run", "--manifest", f"{gen_dir}/manifest.jsonl",
                "--samplers", "glauber,gradient-mh", "--sl", "both",
                "--steps", "400", "--seeds", "0..2", "--sl-k", "8", "--out"]
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    main(run_args + [a])
    main(run_args + [b])

    def rows_without_wallclock(path):
        out = []
        for line in open(path).read().splitlines():
            cells = line.split(",")
            del cells[7]  # wallclock_ms is the one nondeterministic column
            out.append(",".join(cells))
        return out

    ra, rb = rows_without_wallclock(a), rows_without_wallclock(b)
    _report(
        "repeat-run determinism (identical config hash => identical rows)",
        ra == rb and len(ra) == 25,
        f"{len(ra) - 1} result rows byte-identical modulo wallclock",
    )
