"""Paired-run protocol plumbing: records, hashing, CSV, determinism."""

import numpy as np
import pytest

from bqsl.model import ConfigError
from bqsl.samplers import GLAUBER, GRADIENT_MH, SamplerKind
from bqsl.sl import SlConfig
from bqsl.qubo import MIS, QuboInstance, gen_er
from bqsl.bench import (
    RUN_FIELDS,
    RunRecord,
    append_records,
    config_hash,
    default_bench_sl,
    describe_config,
    read_records,
    run_baseline,
    run_many,
    run_pair,
    run_sl_arm,
    sl_overhead_probe,
    write_config_sidecar,
)


@pytest.fixture(scope="module")
def instance():
    return QuboInstance(graph=gen_er(24, 0.2, 1), kind=MIS)


def small_sl():
    return SlConfig(k=8, sigma=3.0, total_mcmc=400)


def test_run_record_invariant():
    with pytest.raises(ConfigError):
        RunRecord("i", GLAUBER, False, 0, 1.0, 500, 400, 0, "x")


def test_config_hash_stable_and_sensitive(instance):
    kind = SamplerKind(tag=GLAUBER)
    a = describe_config(instance, "i0", kind, 400, 10)
    b = describe_config(instance, "i0", kind, 400, 10)
    assert config_hash(a) == config_hash(b)
    c = describe_config(instance, "i0", kind, 500, 10)
    assert config_hash(a) != config_hash(c)
    d = describe_config(instance, "i0", kind, 400, 10, default_bench_sl())
    assert config_hash(a) != config_hash(d)


def test_paired_runs_share_budget_and_are_deterministic(instance):
    kind = SamplerKind(tag=GLAUBER)
    base, sl = run_pair(instance, "i0", kind, 3, 400, small_sl())
    assert base.total_mcmc == sl.total_mcmc == 400
    assert not base.sl_enabled and sl.sl_enabled
    assert base.best_found_at_step <= 400 and sl.best_found_at_step <= 400
    base2 = run_baseline(instance, "i0", kind, 3, 400)
    sl2 = run_sl_arm(instance, "i0", kind, 3, 400, small_sl())
    for x, y in ((base, base2), (sl, sl2)):
        assert x.best_objective == y.best_objective
        assert x.best_found_at_step == y.best_found_at_step
        assert x.config_hash == y.config_hash


def test_gradient_sampler_arm_runs(instance):
    rec = run_sl_arm(
        instance, "i0", SamplerKind(tag=GRADIENT_MH), 0, 200, small_sl()
    )
    assert rec.sampler_kind == GRADIENT_MH and rec.total_mcmc == 200


def test_run_many_matches_serial(instance):
    kind = SamplerKind(tag=GLAUBER)
    jobs = [
        (instance, "i0", kind, s, 200, small_sl(), 10, ("baseline", "sl"))
        for s in range(2)
    ]
    serial = run_many(jobs, workers=1)
    parallel = run_many(jobs, workers=2)
    assert [r.best_objective for r in serial] == [r.best_objective for r in parallel]
    assert len(serial) == 4


def test_csv_append_and_read_roundtrip(tmp_path, instance):
    kind = SamplerKind(tag=GLAUBER)
    base, sl = run_pair(instance, "i0", kind, 0, 200, small_sl())
    path = tmp_path / "res.csv"
    append_records([base], path)
    append_records([sl], path)
    rows = read_records(path)
    assert rows == [base, sl]
    header = path.read_text().splitlines()[0]
    assert header == ",".join(RUN_FIELDS)
    side = write_config_sidecar([{"k": 1}], path)
    assert side.endswith(".config.json")


def test_overhead_probe_positive_and_grows():
    t_small = sl_overhead_probe(256, 8, 0, repeats=2)
    t_big = sl_overhead_probe(4096, 8, 0, repeats=2)
    assert 0 < t_small < t_big
