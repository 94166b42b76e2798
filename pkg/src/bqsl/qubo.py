"""Combinatorial benchmark instances compiled to binary quadratic models.

Three problem kinds over undirected graphs: maximum independent set (MIS,
penalty formulation), MaxCut, and maximum clique (MIS on the complement).
Energies are written over selection variables y in {0,1} and expanded into
spin space through y = (x+1)/2, so sampling mass concentrates on good
solutions; a recorded affine constant ties the spin log-density back to the
combinatorial objective exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .model import BqdModel, ConfigError, SpinState

MIS = "mis"
MAXCUT = "maxcut"
MAXCLIQUE = "maxclique"

LINEAR = "linear"
GEOMETRIC = "geometric"


@dataclass(frozen=True)
class Graph:
    """Simple undirected weighted graph; edges stored as (u, v, w), u < v."""

    n: int
    edges: tuple
    tag: str = ""

    def __post_init__(self):
        seen = set()
        for u, v, _ in self.edges:
            if u == v:
                raise ConfigError(f"self-loop at {u}")
            if not (0 <= u < v < self.n):
                raise ConfigError(f"bad edge ({u}, {v}) for n={self.n}")
            if (u, v) in seen:
                raise ConfigError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency_sets(self) -> list:
        adj = [set() for _ in range(self.n)]
        for u, v, _ in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def complement(self) -> "Graph":
        present = {(u, v) for u, v, _ in self.edges}
        edges = tuple(
            (u, v, 1.0)
            for u in range(self.n)
            for v in range(u + 1, self.n)
            if (u, v) not in present
        )
        return Graph(n=self.n, edges=edges, tag=self.tag + ":complement")


@lru_cache(maxsize=128)
def _edge_arrays(graph: Graph):
    """(u, v, w) as numpy arrays; cached because graphs are immutable."""
    u = np.fromiter((e[0] for e in graph.edges), dtype=np.int64, count=graph.m)
    v = np.fromiter((e[1] for e in graph.edges), dtype=np.int64, count=graph.m)
    w = np.fromiter((e[2] for e in graph.edges), dtype=float, count=graph.m)
    return u, v, w


@lru_cache(maxsize=128)
def _neighbor_lists(graph: Graph):
    return tuple(
        np.fromiter(sorted(s), dtype=np.int64, count=len(s))
        for s in graph.adjacency_sets()
    )


@lru_cache(maxsize=128)
def _cached_complement(graph: Graph) -> Graph:
    return graph.complement()


@dataclass(frozen=True)
class BetaSchedule:
    start: float = 0.1
    end: float = 5.0
    ramp: str = LINEAR

    def __post_init__(self):
        if self.ramp not in (LINEAR, GEOMETRIC):
            raise ConfigError(f"unknown ramp {self.ramp!r}")
        if self.ramp == GEOMETRIC and self.start <= 0:
            raise ConfigError("geometric ramp requires a positive start")


@dataclass(frozen=True)
class QuboInstance:
    graph: Graph
    kind: str
    lam: float = 1.0001
    c_weight: float = 1.0
    beta_schedule: BetaSchedule = field(default_factory=BetaSchedule)

    def __post_init__(self):
        if self.kind not in (MIS, MAXCUT, MAXCLIQUE):
            raise ConfigError(f"unknown problem kind {self.kind!r}")
        if self.kind in (MIS, MAXCLIQUE) and self.lam <= 1.0:
            raise ConfigError("penalty must exceed the unit reward (lambda > 1)")


def gen_er(n: int, p: float, seed) -> Graph:
    """Seeded Erdos-Renyi graph: each pair kept independently with prob p."""
    if not 0.0 < p < 1.0:
        raise ConfigError(f"edge probability must be in (0,1), got {p}")
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v, 1.0))
    return Graph(n=n, edges=tuple(edges), tag=f"er-{n}-{p}-{seed}")


def gen_ba(n: int, m: int, seed) -> Graph:
    """Seeded preferential-attachment graph.

    Starts from an m-clique; every later vertex attaches m edges to
    distinct existing vertices drawn with degree-proportional probability
    (collisions redrawn), so |E| = C(m,2) + m*(n-m).
    """
    if not 1 <= m < n:
        raise ConfigError(f"need 1 <= m < n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    deg = np.zeros(n, dtype=np.int64)
    edges = []
    for u in range(m):
        for v in range(u + 1, m):
            edges.append((u, v, 1.0))
            deg[u] += 1
            deg[v] += 1
    if m == 1:
        deg[0] = 1  # seed weight so the first attachment has mass
    for v in range(m, n):
        chosen = set()
        weights = deg[:v].astype(float)
        while len(chosen) < m:
            r = rng.random() * weights.sum()
            u = int(np.searchsorted(np.cumsum(weights), r, side="right"))
            u = min(u, v - 1)
            if u in chosen:
                continue
            chosen.add(u)
        for u in sorted(chosen):
            edges.append((u, v, 1.0))
            deg[u] += 1
            deg[v] += 1
    if m == 1:
        deg[0] -= 1
    return Graph(n=n, edges=tuple(edges), tag=f"ba-{n}-{m}-{seed}")


@dataclass(frozen=True)
class CompiledQubo:
    """Spin-space expansion record of one instance at a fixed beta.

    beta * (-energy01(y(x))) == log_density_unnormalized(model, x) + const.
    b_unit and const_unit are the beta-free parts used for annealing ramps.
    """

    model: BqdModel
    const: float
    b_unit: np.ndarray
    const_unit: float


def _mis_parts(graph: Graph, lam: float, c: float):
    """Energy-unit coupling matrix, field, and constant for the penalty MIS
    energy -c sum(y) + lam sum_E y_i y_j."""
    w = np.zeros((graph.n, graph.n))
    for u, v, _ in graph.edges:
        w[u, v] = w[v, u] = lam / 4.0
    deg = graph.degrees()
    b_unit = c / 2.0 - lam * deg / 4.0
    const_unit = c * graph.n / 2.0 - lam * graph.m / 4.0
    return w, b_unit, const_unit


def compile_to_bqd(instance: QuboInstance, beta: float) -> CompiledQubo:
    """Expand the {0,1} energy into spin space; exact affine bookkeeping."""
    g = instance.graph
    if instance.kind == MIS:
        w, b_unit, const_unit = _mis_parts(g, instance.lam, instance.c_weight)
    elif instance.kind == MAXCLIQUE:
        w, b_unit, const_unit = _mis_parts(
            _cached_complement(g), instance.lam, instance.c_weight
        )
    elif instance.kind == MAXCUT:
        w = np.zeros((g.n, g.n))
        for u, v, wt in g.edges:
            w[u, v] = w[v, u] = wt / 2.0
        b_unit = np.zeros(g.n)
        const_unit = 0.5 * sum(wt for _, _, wt in g.edges)
    else:  # pragma: no cover
        raise ConfigError(instance.kind)
    model = BqdModel.from_dense(w, beta * b_unit, beta)
    return CompiledQubo(
        model=model,
        const=beta * const_unit,
        b_unit=np.asarray(b_unit, dtype=float),
        const_unit=const_unit,
    )


def retarget_beta(comp: CompiledQubo, beta: float) -> CompiledQubo:
    """Same instance at a different inverse temperature (cheap ramp step)."""
    model = comp.model.with_beta(beta).with_field(beta * comp.b_unit)
    return replace(comp, model=model, const=beta * comp.const_unit)


def _selected(spins) -> np.ndarray:
    return np.asarray(spins) > 0


def objective_from_spins(instance: QuboInstance, spins) -> float:
    """Raw combinatorial objective read from the graph, never from the
    log-density: selected-set size for MIS/MaxClique, cut weight for MaxCut."""
    sel = _selected(spins)
    if len(sel) != instance.graph.n:
        raise ConfigError("state dimension does not match the graph")
    if instance.kind in (MIS, MAXCLIQUE):
        return float(instance.c_weight * sel.sum())
    u, v, w = _edge_arrays(instance.graph)
    return float(np.sum(w * (sel[u] != sel[v])))


def objective_value(instance: QuboInstance, state: SpinState) -> float:
    return objective_from_spins(instance, state.spins)


def energy01(instance: QuboInstance, state: SpinState) -> float:
    """The {0,1} penalty energy that the compilation expands (lower is
    better); used by the compilation-exactness audit."""
    sel = _selected(state.spins)
    g = instance.graph
    if instance.kind == MAXCUT:
        return -objective_value(instance, state)
    graph = g if instance.kind == MIS else _cached_complement(g)
    penalty = sum(1.0 for u, v, _ in graph.edges if sel[u] and sel[v])
    return float(-instance.c_weight * sel.sum() + instance.lam * penalty)


def is_feasible(instance: QuboInstance, state: SpinState) -> bool:
    sel = _selected(state.spins)
    g = instance.graph
    if instance.kind == MAXCUT:
        return True
    # MIS: no edge inside the selected set; clique: no complement edge inside
    graph = g if instance.kind == MIS else _cached_complement(g)
    u, v, _ = _edge_arrays(graph)
    return not bool(np.any(sel[u] & sel[v]))


def _repair_independent(graph: Graph, sel: np.ndarray) -> np.ndarray:
    """Deselect-then-greedy-add repair for an independence constraint.

    While a conflict exists, the selected vertex with the most selected
    neighbors is deselected (ties keep the lower index, i.e. the higher
    index is dropped); then vertices are greedily re-added in ascending
    order whenever feasible.
    """
    n = graph.n
    u, v, _ = _edge_arrays(graph)
    adj = _neighbor_lists(graph)
    sel = sel.copy()
    while True:
        conflict = sel[u] & sel[v]
        if not conflict.any():
            break
        sdeg = np.bincount(u[conflict], minlength=n) + np.bincount(
            v[conflict], minlength=n
        )
        sel[n - 1 - int(np.argmax(sdeg[::-1]))] = False
    blocked = np.zeros(n, dtype=bool)
    for q in np.nonzero(sel)[0]:
        blocked[adj[q]] = True
    for q in range(n):
        if not sel[q] and not blocked[q]:
            sel[q] = True
            blocked[adj[q]] = True
    return sel


def repair(instance: QuboInstance, state: SpinState) -> SpinState:
    """Map any configuration to a feasible one (identity for MaxCut)."""
    g = instance.graph
    comp = compile_to_bqd(instance, 1.0)  # only for cache rebuilding
    if instance.kind == MAXCUT:
        return SpinState.from_spins(comp.model, state.spins)
    graph = g if instance.kind == MIS else _cached_complement(g)
    sel = _repair_independent(graph, _selected(state.spins))
    spins = np.where(sel, 1, -1).astype(np.int8)
    return SpinState.from_spins(comp.model, spins)


def repair_spins(instance: QuboInstance, spins: np.ndarray) -> np.ndarray:
    """Spin-vector repair without touching any model cache (hot path)."""
    if instance.kind == MAXCUT:
        return np.asarray(spins, dtype=np.int8)
    g = instance.graph
    graph = g if instance.kind == MIS else _cached_complement(g)
    sel = _repair_independent(graph, _selected(spins))
    return np.where(sel, 1, -1).astype(np.int8)


def beta_ramp(schedule: BetaSchedule, step: int, total: int) -> float:
    if not 0 <= step <= total:
        raise ConfigError(f"step {step} outside [0, {total}]")
    frac = step / total if total else 1.0
    if schedule.ramp == LINEAR:
        return schedule.start + (schedule.end - schedule.start) * frac
    return schedule.start * (schedule.end / schedule.start) ** frac


def save_graph(graph: Graph, path) -> None:
    """Graph file: 'N M' header, then 'u v [w]' lines (weight omitted at 1)."""
    with open(path, "w") as fh:
        fh.write(f"{graph.n} {graph.m}\n")
        for u, v, w in graph.edges:
            if w == 1.0:
                fh.write(f"{u} {v}\n")
            else:
                fh.write(f"{u} {v} {float(w)!r}\n")


def load_graph(path) -> Graph:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        n, m = (int(v) for v in lines[0].split())
        edges = []
        for ln in lines[1 : m + 1]:
            parts = ln.split()
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) > 2 else 1.0
            if u > v:
                u, v = v, u
            edges.append((u, v, w))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"malformed graph file {path}: {exc}") from exc
    if len(edges) != m:
        raise ConfigError(f"{path}: expected {m} edges, found {len(edges)}")
    return Graph(n=n, edges=tuple(edges), tag=str(path))


def save_manifest(entries, path) -> None:
    """Instance manifest: one JSON record per line."""
    with open(path, "w") as fh:
        for e in entries:
            fh.write(json.dumps(e) + "\n")


def load_manifest(path) -> list:
    with open(path) as fh:
        return [json.loads(ln) for ln in fh if ln.strip()]


def instance_from_manifest(entry: dict) -> QuboInstance:
    sched = entry.get("beta_schedule", {})
    return QuboInstance(
        graph=load_graph(entry["graph"]),
        kind=entry["kind"],
        lam=float(entry.get("lambda", 1.0001)),
        c_weight=float(entry.get("c", 1.0)),
        beta_schedule=BetaSchedule(
            start=float(sched.get("start", 0.1)),
            end=float(sched.get("end", 5.0)),
            ramp=sched.get("ramp", LINEAR),
        ),
    )
