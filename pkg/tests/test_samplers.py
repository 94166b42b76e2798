"""Kernel-level behavior: weight routes, damping limits, adaptation,
chain determinism, and empirical stationarity on a small model."""

import numpy as np
import pytest

from bqsl.model import BqdModel, SpinState, flip_delta_all
from bqsl.samplers import (
    ADAPT_INTERVAL,
    DMALA,
    DULA,
    GLAUBER,
    GRADIENT_MH,
    METROPOLIS,
    TARGET_ACCEPTANCE,
    Chain,
    ChainStats,
    SamplerKind,
    adapt_step_size,
    dula_flip_probs,
    gwg,
    pas,
    pas_site_weights,
    proposal_weights,
)
from bqsl.exact import exact_distribution


def random_model(seed, n=6, beta=0.8):
    rng = np.random.default_rng(seed)
    w = rng.normal(0, 0.7, (n, n))
    w = 0.5 * (w + w.T)
    return BqdModel.from_dense(w, 0.4 * rng.standard_normal(n), beta)


def test_square_root_weight_routes_agree():
    m = random_model(11)
    rng = np.random.default_rng(0)
    state = SpinState.random(m, rng)
    assert np.allclose(
        proposal_weights(m, state), pas_site_weights(m, state), atol=1e-12
    )


def test_gwg_and_pas_are_the_same_kernel():
    assert gwg() == pas()
    assert gwg().tag == GRADIENT_MH


def test_dula_probs_reduce_to_pure_factorized_at_infinite_step():
    m = random_model(12)
    rng = np.random.default_rng(1)
    state = SpinState.random(m, rng)
    d = flip_delta_all(m, state)
    expected = 1.0 / (1.0 + np.exp(-d / 2.0))
    assert np.allclose(dula_flip_probs(m, state, float("inf")), expected)
    # finite damping strictly lowers every flip probability
    assert np.all(dula_flip_probs(m, state, 0.5) < expected)


def test_step_size_adaptation_direction():
    up = ChainStats()
    for _ in range(ADAPT_INTERVAL):
        up.record(True)
    assert adapt_step_size(0.2, up) > 0.2
    down = ChainStats()
    for _ in range(ADAPT_INTERVAL):
        down.record(False)
    assert adapt_step_size(0.2, down) < 0.2
    # at the target rate the step size is (nearly) unchanged
    at = ChainStats()
    for i in range(1000):
        at.record(i < round(1000 * TARGET_ACCEPTANCE))
    assert adapt_step_size(0.2, at) == pytest.approx(0.2, rel=1e-3)


@pytest.mark.parametrize(
    "kind",
    [
        SamplerKind(tag=GLAUBER),
        SamplerKind(tag=METROPOLIS),
        SamplerKind(tag=GRADIENT_MH),
        SamplerKind(tag=GRADIENT_MH, site_selection="uniform"),
        SamplerKind(tag=DULA),
        SamplerKind(tag=DMALA),
    ],
)
def test_chain_is_deterministic_per_seed(kind):
    m = random_model(13)
    a = Chain.start(m, kind, 42)
    b = Chain.start(m, kind, 42)
    for _ in range(200):
        a.step(m)
        b.step(m)
    assert np.array_equal(a.state.spins, b.state.spins)
    assert np.allclose(a.state.cache, b.state.cache)


def test_dmala_adapts_toward_target_acceptance():
    m = random_model(14, n=8)
    chain = Chain.start(m, SamplerKind(tag=DMALA), 7)
    initial = chain.step_size
    for _ in range(15_000):
        chain.step(m)
    before = chain.stats.accepted
    for _ in range(5000):
        chain.step(m)
    recent = (chain.stats.accepted - before) / 5000
    assert chain.step_size != initial
    assert abs(recent - TARGET_ACCEPTANCE) < 0.15


def test_empirical_marginals_match_enumeration():
    m = random_model(15, n=6)
    exact_mean = exact_distribution(m).mean()
    chain = Chain.start(m, SamplerKind(tag=GLAUBER), 3)
    burn, keep = 2000, 200_000
    for _ in range(burn):
        chain.step(m)
    acc = np.zeros(m.n)
    for _ in range(keep):
        chain.step(m)
        acc += chain.state.spins
    est = acc / keep
    # correlated-sample standard error, generously inflated
    se = 5.0 * np.sqrt(20.0 / keep)
    assert np.all(np.abs(est - exact_mean) < 3.0 * se + 0.02)


def test_sampler_kind_validation():
    with pytest.raises(Exception):
        SamplerKind(tag="nope")
    with pytest.raises(Exception):
        SamplerKind(tag=GRADIENT_MH, site_selection="bogus")
