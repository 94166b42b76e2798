"""Graph generators, energy compilation exactness, feasibility and repair."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bqsl.model import ConfigError, SpinState, log_density_unnormalized
from bqsl.qubo import (
    MAXCLIQUE,
    MAXCUT,
    MIS,
    BetaSchedule,
    Graph,
    QuboInstance,
    beta_ramp,
    compile_to_bqd,
    energy01,
    gen_ba,
    gen_er,
    instance_from_manifest,
    is_feasible,
    load_graph,
    load_manifest,
    objective_value,
    repair,
    repair_spins,
    retarget_beta,
    save_graph,
    save_manifest,
)

K3 = Graph(3, ((0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)))


def spin_state(instance, spins, beta=1.0):
    comp = compile_to_bqd(instance, beta)
    return comp, SpinState.from_spins(comp.model, np.asarray(spins, dtype=np.int8))


def test_graph_validation():
    with pytest.raises(ConfigError):
        Graph(3, ((0, 0, 1.0),))
    with pytest.raises(ConfigError):
        Graph(3, ((0, 3, 1.0),))
    with pytest.raises(ConfigError):
        Graph(3, ((0, 1, 1.0), (0, 1, 2.0)))


def test_er_deterministic_and_binomial_count():
    g1 = gen_er(100, 0.1, 5)
    g2 = gen_er(100, 0.1, 5)
    assert g1.edges == g2.edges
    pairs = 100 * 99 // 2
    mean, sd = pairs * 0.1, math.sqrt(pairs * 0.1 * 0.9)
    assert abs(g1.m - mean) < 4 * sd
    with pytest.raises(ConfigError):
        gen_er(10, 1.5, 0)


def test_ba_edge_count_exact():
    for n, m in ((128, 4), (50, 3), (10, 1)):
        g = gen_ba(n, m, 2)
        assert g.m == m * (m - 1) // 2 + m * (n - m)
    with pytest.raises(ConfigError):
        gen_ba(5, 5, 0)


@pytest.mark.parametrize("kind", [MIS, MAXCUT, MAXCLIQUE])
def test_compilation_exactness_all_states(kind):
    g = gen_er(8, 0.4, 3)
    inst = QuboInstance(graph=g, kind=kind)
    for beta in (0.3, 2.0):
        comp = compile_to_bqd(inst, beta)
        for bits in itertools.product([-1, 1], repeat=8):
            st_ = SpinState.from_spins(comp.model, np.array(bits, dtype=np.int8))
            lhs = beta * (-energy01(inst, st_))
            rhs = log_density_unnormalized(comp.model, st_) + comp.const
            assert abs(lhs - rhs) < 1e-10


def test_maxcut_compiled_field_is_zero():
    inst = QuboInstance(graph=gen_ba(20, 2, 1), kind=MAXCUT)
    comp = compile_to_bqd(inst, 1.3)
    assert np.all(comp.model.b == 0.0)


def test_maxcut_objective_flip_symmetric_and_triangle_value():
    inst = QuboInstance(graph=K3, kind=MAXCUT)
    comp, state = spin_state(inst, [1, 1, -1])
    assert objective_value(inst, state) == pytest.approx(2.0)
    _, flipped = spin_state(inst, [-1, -1, 1])
    assert objective_value(inst, flipped) == pytest.approx(2.0)


def test_mis_k3_energy_plugin():
    inst = QuboInstance(graph=K3, kind=MIS)
    _, all_ones = spin_state(inst, [1, 1, 1])
    assert energy01(inst, all_ones) == pytest.approx(-3 + 1.0001 * 3)


def test_empty_graph_mis_optimum_is_all_selected():
    g = Graph(4, ())
    inst = QuboInstance(graph=g, kind=MIS)
    _, full = spin_state(inst, [1, 1, 1, 1])
    assert is_feasible(inst, full)
    assert energy01(inst, full) == pytest.approx(-4.0)
    assert objective_value(inst, full) == pytest.approx(4.0)


def test_mis_feasibility_predicates():
    inst = QuboInstance(graph=K3, kind=MIS)
    _, one = spin_state(inst, [1, -1, -1])
    assert is_feasible(inst, one) and objective_value(inst, one) == 1.0
    _, two = spin_state(inst, [1, 1, -1])
    assert not is_feasible(inst, two)


def test_repair_k3_keeps_lowest_index():
    inst = QuboInstance(graph=K3, kind=MIS)
    _, state = spin_state(inst, [1, 1, 1])
    out = repair(inst, state)
    assert list(out.spins) == [1, -1, -1]
    assert objective_value(inst, out) == 1.0


def test_repair_star_drops_center():
    star = Graph(6, tuple((0, v, 1.0) for v in range(1, 6)))
    inst = QuboInstance(graph=star, kind=MIS)
    _, state = spin_state(inst, [1] * 6)
    out = repair(inst, state)
    assert list(out.spins) == [-1, 1, 1, 1, 1, 1]
    assert objective_value(inst, out) == 5.0


def test_repair_feasible_input_only_improves():
    inst = QuboInstance(graph=K3, kind=MIS)
    _, state = spin_state(inst, [-1, 1, -1])
    out = repair(inst, state)
    assert is_feasible(inst, out)
    assert objective_value(inst, out) >= 1.0


@settings(deadline=None, max_examples=60)
@given(st.integers(min_value=0, max_value=10_000), st.sampled_from([MIS, MAXCLIQUE]))
def test_repair_always_feasible(seed, kind):
    rng = np.random.default_rng(seed)
    g = gen_er(12, 0.3, seed % 7)
    inst = QuboInstance(graph=g, kind=kind)
    spins = rng.choice(np.array([-1, 1], dtype=np.int8), size=12)
    comp = compile_to_bqd(inst, 1.0)
    out = SpinState.from_spins(comp.model, repair_spins(inst, spins))
    assert is_feasible(inst, out)


def test_mis_energy_optimum_matches_exhaustive_search():
    g = gen_er(10, 0.35, 11)
    inst = QuboInstance(graph=g, kind=MIS)
    comp = compile_to_bqd(inst, 1.0)
    best_energy, best_states = math.inf, []
    for bits in itertools.product([-1, 1], repeat=10):
        state = SpinState.from_spins(comp.model, np.array(bits, dtype=np.int8))
        e = energy01(inst, state)
        if e < best_energy - 1e-12:
            best_energy, best_states = e, [state]
        elif abs(e - best_energy) < 1e-12:
            best_states.append(state)
    brute = max(
        sum(bits)
        for bits in itertools.product([0, 1], repeat=10)
        if not any(bits[u] and bits[v] for u, v, _ in g.edges)
    )
    for state in best_states:
        assert is_feasible(inst, state)
        assert objective_value(inst, state) == brute


def test_lambda_must_exceed_one_for_penalty_kinds():
    with pytest.raises(ConfigError):
        QuboInstance(graph=K3, kind=MIS, lam=1.0)
    QuboInstance(graph=K3, kind=MAXCUT, lam=1.0)  # no penalty constraint


def test_beta_ramp():
    lin = BetaSchedule(start=0.5, end=10.0, ramp="linear")
    assert beta_ramp(lin, 0, 100) == 0.5
    assert beta_ramp(lin, 100, 100) == 10.0
    assert beta_ramp(lin, 50, 100) == pytest.approx(5.25)
    geo = BetaSchedule(start=0.1, end=10.0, ramp="geometric")
    assert beta_ramp(geo, 50, 100) == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        BetaSchedule(start=0.0, ramp="geometric")
    with pytest.raises(ConfigError):
        beta_ramp(lin, 101, 100)


def test_retarget_beta_matches_fresh_compile():
    inst = QuboInstance(graph=gen_er(9, 0.4, 4), kind=MIS)
    a = compile_to_bqd(inst, 2.2)
    b = retarget_beta(compile_to_bqd(inst, 0.5), 2.2)
    assert np.allclose(a.model.b, b.model.b)
    assert a.model.beta == b.model.beta
    assert a.const == pytest.approx(b.const)


def test_graph_file_roundtrip(tmp_path):
    g = gen_er(15, 0.3, 8)
    path = tmp_path / "g.graph"
    save_graph(g, path)
    g2 = load_graph(path)
    assert g2.n == g.n and set(g2.edges) == set(g.edges)
    weighted = Graph(4, ((0, 2, 1.5), (1, 3, 1.0)))
    save_graph(weighted, path)
    assert set(load_graph(path).edges) == set(weighted.edges)


def test_malformed_graph_file(tmp_path):
    path = tmp_path / "bad.graph"
    path.write_text("3 2\n0 1\n")
    with pytest.raises(ConfigError):
        load_graph(path)


def test_manifest_roundtrip(tmp_path):
    g = gen_er(10, 0.3, 1)
    gpath = str(tmp_path / "g.graph")
    save_graph(g, gpath)
    entry = {
        "id": "g0",
        "kind": MIS,
        "graph": gpath,
        "lambda": 1.5,
        "c": 1.0,
        "beta_schedule": {"start": 0.2, "end": 4.0, "ramp": "linear"},
        "seed": 1,
    }
    mpath = tmp_path / "manifest.jsonl"
    save_manifest([entry], mpath)
    loaded = load_manifest(mpath)
    assert loaded == [entry]
    inst = instance_from_manifest(loaded[0])
    assert inst.kind == MIS and inst.lam == 1.5
    assert inst.graph.n == 10 and inst.beta_schedule.end == 4.0
