"""Overlay composition of an extreme depth-robust graph onto a base graph.

The base graph supplies high space complexity; the overlay adds an
indegree-reduced extreme depth-robust graph J whose metanode terminals are
identified with the base's sources, so re-pebbling many sources takes a long
time.  Base graphs come from three providers: small graphs picked by
exhaustive oracle search, stacked superconcentrators, or a user file.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, field

from .graph import Dag, NodeSet, as_nodeset
from .pebbling import Pebbling
from .reduction import ReductionMap, reduce_dr
from .robustness import build_extreme_dr

CERTIFIED = "certified-small"
SC_STACK = "superconcentrator-stack"
EXTERNAL = "external"
BASE_KINDS = (CERTIFIED, SC_STACK, EXTERNAL)
CERTIFIED_MAX_NODES = 12
EXHAUSTIVE_MAX_NODES = 6


class BaseGraphError(ValueError):
    pass


@dataclass(frozen=True)
class BaseGraph:
    dag: Dag
    source_set: NodeSet
    provenance: dict = field(default_factory=dict)


def make_base(dag: Dag, provenance: dict | None = None) -> BaseGraph:
    if dag.is_view:
        raise BaseGraphError("a base graph must be a full graph")
    if dag.indeg_cap > 2:
        raise BaseGraphError(f"base graph indegree {dag.indeg_cap} exceeds 2")
    if dag.n < 1:
        raise BaseGraphError("a base graph needs at least one node")
    return BaseGraph(dag, dag.sources(), dict(provenance or {"kind": EXTERNAL}))


@dataclass(frozen=True)
class OverlayResult:
    dag: Dag
    base: BaseGraph
    base_ids: tuple[int, ...]          # base node -> composed id (index 0 unused)
    overlay_map: dict                  # base source -> composed id of its J terminal
    reduction: ReductionMap
    epsilon: float
    delta: int
    seed: int

    def restrict_to_base(self, p: Pebbling) -> Pebbling:
        """P_i intersected with the base nodes, renamed to base ids."""
        back = {c: b for b, c in enumerate(self.base_ids) if b}
        steps = tuple(NodeSet(back[v] for v in conf if v in back) for conf in p.steps)
        return Pebbling(steps, p.mode)


def overlay(base: BaseGraph, epsilon, seed: int = 0, **dr_overrides) -> OverlayResult:
    """Identify the terminals of reduce_dr(extreme-DR on |S| nodes) with the sources.

    Composed numbering: J's 2*|S|*delta nodes first (terminal 2*v*delta is
    the v-th source in ascending order), then the base's non-source nodes in
    base order.
    """
    g = base.dag
    sources = list(base.source_set)
    if sources != list(g.sources()):
        raise BaseGraphError("source_set does not match the base graph's sources")
    if g.indeg_cap > 2:
        raise BaseGraphError("base graph indegree exceeds 2")
    m = len(sources)
    if m < 1:
        raise BaseGraphError("base graph has no sources")
    d = build_extreme_dr(m, epsilon, seed, **dr_overrides)
    j, jmap = reduce_dr(d)
    delta = jmap.delta
    base_ids = [0] * (g.n + 1)
    overlay_map = {}
    for v, s in enumerate(sources, start=1):
        base_ids[s] = jmap.terminal(v)
        overlay_map[s] = jmap.terminal(v)
    nxt = j.n + 1
    for b in range(1, g.n + 1):
        if not base_ids[b]:
            base_ids[b] = nxt
            nxt += 1
    edges = list(j.edges) + [(base_ids[u], base_ids[v]) for u, v in g.edges]
    recipe = {
        "kind": "main",
        "epsilon": float(epsilon),
        "delta": delta,
        "seed": seed,
        "base": base.provenance,
        "base_nodes": g.n,
        "sources": m,
        "dr_graph": d.recipe,
    }
    composed = Dag(nxt - 1, edges, recipe=recipe)
    return OverlayResult(composed, base, tuple(base_ids), overlay_map, jmap,
                         float(epsilon), delta, seed)


# -- indegree two by fan-in trees ---------------------------------------

def to_indegree_two(g: Dag) -> tuple[Dag, dict[int, int]]:
    """Replace each fan-in above 2 by a balanced tree of helper nodes.

    Helpers are numbered just before the node they feed, so the numbering
    stays topological.  Returns the new graph and old -> new ids.
    """
    new_id: dict[int, int] = {}
    edges = []
    nxt = 1
    for v in range(1, g.n + 1):
        layer = [new_id[u] for u in g.parent_list(v)]
        while len(layer) > 2:
            merged = []
            for a, b in zip(layer[::2], layer[1::2]):
                edges += [(a, nxt), (b, nxt)]
                merged.append(nxt)
                nxt += 1
            if len(layer) % 2:
                merged.append(layer[-1])
            layer = merged
        new_id[v] = nxt
        edges += [(u, nxt) for u in layer]
        nxt += 1
    return Dag(nxt - 1, edges), new_id


# -- superconcentrators -------------------------------------------------

def _hall_ok(nbrs: list[int], limit: int) -> bool:
    """Every set of at most ``limit`` left nodes has >= as many neighbours."""
    m = len(nbrs)
    for k in range(1, min(limit, m) + 1):
        for combo in itertools.combinations(range(m), k):
            reach = 0
            for i in combo:
                reach |= nbrs[i]
            if reach.bit_count() < k:
                return False
    return True


def _concentrator(m: int, h: int, rng: random.Random, degree: int = 4) -> tuple[list[int], int]:
    """Neighbour masks (into [h]) of a sampled m -> h concentrator, Hall-checked."""
    degree = min(degree, h)
    for attempt in range(200):
        nbrs = []
        for i in range(m):
            picks = {i % h}
            while len(picks) < degree:
                picks.add(rng.randrange(h))
            mask = 0
            for p in picks:
                mask |= 1 << p
            nbrs.append(mask)
        if m > 16 or _hall_ok(nbrs, h):
            return nbrs, attempt
    raise RuntimeError(f"no {m}->{h} concentrator found")


def _sc_edges(m: int, rng: random.Random) -> tuple[int, list[tuple[int, int]]]:
    """Node count and edges of a recursive superconcentrator with m inputs/outputs.

    Local layout: inputs 1..m, the half-size recursive block, outputs last.
    """
    if m <= 2:
        return 2 * m, [(a, m + b) for a in range(1, m + 1) for b in range(1, m + 1)]
    h = m // 2
    sub_n, sub_edges = _sc_edges(h, rng)
    off = m
    total = m + sub_n + m
    out0 = m + sub_n
    edges = [(i, out0 + i) for i in range(1, m + 1)]
    edges += [(u + off, v + off) for u, v in sub_edges]
    conc, _ = _concentrator(m, h, rng)
    for i, mask in enumerate(conc, start=1):
        edges += [(i, off + p) for p in NodeSet.from_mask(mask)]
    rev, _ = _concentrator(m, h, rng)
    sub_out0 = off + sub_n - h
    for i, mask in enumerate(rev, start=1):
        edges += [(sub_out0 + p, out0 + i) for p in NodeSet.from_mask(mask)]
    return total, edges


@dataclass(frozen=True)
class Superconcentrator:
    dag: Dag
    inputs: NodeSet
    outputs: NodeSet
    certificate: dict


def build_superconcentrator(m: int, seed: int = 0, k_exhaustive: int = 3,
                            samples: int = 200) -> Superconcentrator:
    """Recursive superconcentrator with m inputs (first m ids) and m outputs (last m).

    Inputs reach outputs through a direct matching and, via sampled
    concentrators, through a half-size superconcentrator.  The certificate
    records the flow check: exhaustive for k <= k_exhaustive, sampled above.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = random.Random(seed)
    n, edges = _sc_edges(m, rng)
    g = Dag(n, edges, recipe={"kind": "superconcentrator", "m": m, "seed": seed})
    inputs = NodeSet(range(1, m + 1))
    outputs = NodeSet(range(n - m + 1, n + 1))
    bad = verify_superconcentrator(g, inputs, outputs, k_exhaustive, samples=samples, seed=seed)
    cert = {"k_exhaustive": min(k_exhaustive, m), "sampled_pairs": samples if m > k_exhaustive else 0,
            "ok": bad is None, "counterexample": None}
    if bad is not None:
        cert["counterexample"] = {"inputs": bad[0].to_list(), "outputs": bad[1].to_list(), "flow": bad[2]}
    return Superconcentrator(g, inputs, outputs, cert)


def disjoint_paths(g: Dag, a, b) -> int:
    """Maximum number of vertex-disjoint paths from set a to set b."""
    a, b = as_nodeset(a), as_nodeset(b)
    n = g.n
    # split v into v_in = 2v, v_out = 2v+1; source 0, sink 1
    cap: dict[tuple[int, int], int] = {}
    adj: dict[int, list[int]] = {}

    def add(u, v, c):
        if (u, v) not in cap:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
            cap[(u, v)] = 0
            cap.setdefault((v, u), 0)
        cap[(u, v)] += c

    for v in g.node_list():
        add(2 * v, 2 * v + 1, 1)
    for u, v in g.edges:
        add(2 * u + 1, 2 * v, 1)
    for v in a:
        add(0, 2 * v, 1)
    for v in b:
        add(2 * v + 1, 1, 1)
    flow = 0
    while True:
        prev = {0: None}
        q = deque([0])
        while q and 1 not in prev:
            u = q.popleft()
            for w in adj.get(u, ()):
                if w not in prev and cap[(u, w)] > 0:
                    prev[w] = u
                    q.append(w)
        if 1 not in prev:
            return flow
        w = 1
        while prev[w] is not None:
            u = prev[w]
            cap[(u, w)] -= 1
            cap[(w, u)] += 1
            w = u
        flow += 1
        if flow > n:
            return flow


def verify_superconcentrator(g: Dag, inputs, outputs, k_exhaustive: int, *, samples: int = 0,
                             seed: int = 0, max_checks: int = 500_000):
    """None if every tested (k, A, B) admits k disjoint paths, else (A, B, flow)."""
    ins, outs = list(as_nodeset(inputs)), list(as_nodeset(outputs))
    m = len(ins)
    if len(outs) != m:
        raise ValueError("inputs and outputs must have the same size")
    k_exhaustive = min(k_exhaustive, m)
    total = sum(math.comb(m, k) ** 2 for k in range(1, k_exhaustive + 1))
    if total > max_checks:
        raise ValueError(f"exhaustive check needs {total} flow computations (limit {max_checks})")
    for k in range(1, k_exhaustive + 1):
        for a in itertools.combinations(ins, k):
            for b in itertools.combinations(outs, k):
                f = disjoint_paths(g, a, b)
                if f < k:
                    return NodeSet(a), NodeSet(b), f
    rng = random.Random(seed)
    if k_exhaustive < m:
        for _ in range(samples):
            k = rng.randint(k_exhaustive + 1, m)
            a, b = sorted(rng.sample(ins, k)), sorted(rng.sample(outs, k))
            f = disjoint_paths(g, a, b)
            if f < k:
                return NodeSet(a), NodeSet(b), f
    return None


# -- base graph providers ----------------------------------------------

def default_source_count(n: int) -> int:
    return max(1, int(n / math.log2(n))) if n >= 2 else 1


def _base_candidates(n: int, k: int):
    choices = []
    for v in range(k + 1, n + 1):
        earlier = range(1, v)
        opts = [(u,) for u in earlier] + list(itertools.combinations(earlier, 2))
        choices.append((v, opts))
    return choices


def certified_small_base(n: int, seed: int = 0, sources: int | None = None,
                         samples: int = 200) -> BaseGraph:
    """Indegree-2 graph with ``sources`` sources maximising parallel min space.

    Sources are nodes 1..k; every later node picks one or two earlier
    parents.  All such graphs are searched for n <= 6, otherwise a seeded
    sample.  Ties go to the lexicographically smallest edge list.
    """
    from .strategies import min_space

    if not 1 <= n <= CERTIFIED_MAX_NODES:
        raise BaseGraphError(f"certified-small bases support 1..{CERTIFIED_MAX_NODES} nodes")
    k = default_source_count(n) if sources is None else sources
    if not 1 <= k <= n:
        raise BaseGraphError("source count must lie in 1..n")
    choices = _base_candidates(n, k)
    if n <= EXHAUSTIVE_MAX_NODES:
        method = "exhaustive"
        pool = itertools.product(*[opts for _, opts in choices])
    else:
        method = "sampled"
        rng = random.Random(seed)
        pool = [tuple(rng.choice(opts) for _, opts in choices) for _ in range(samples)]
    best = None
    count = 0
    for pick in pool:
        edges = sorted((u, v) for (v, _), ps in zip(choices, pick) for u in ps)
        g = Dag(n, edges)
        if len(g.sources()) != k:
            continue
        count += 1
        key = (-min_space(g), edges)
        if best is None or key < best[0]:
            best = (key, g)
    if best is None:
        raise BaseGraphError("no candidate base graph with the requested source count")
    space = -best[0][0]
    prov = {"kind": CERTIFIED, "n": n, "sources": k, "min_space_parallel": space,
            "method": method, "candidates": count, "seed": seed}
    return make_base(best[1].with_recipe(prov), prov)


def _stack_layer_size(m: int, seed: int) -> int:
    n, edges = _sc_edges(m, random.Random(seed))
    return to_indegree_two(Dag(n, edges))[0].n


def superconcentrator_stack_base(m: int, layers: int, seed: int = 0) -> BaseGraph:
    """``layers`` superconcentrators in series (outputs feed the next inputs), indegree 2."""
    if m < 1 or layers < 1:
        raise BaseGraphError("m and layers must be positive")
    edges = []
    offset = 0
    prev_outputs = None
    for layer in range(layers):
        sc = build_superconcentrator(m, seed * 7919 + layer, k_exhaustive=min(2, m), samples=50)
        g2, new_id = to_indegree_two(sc.dag)
        ins = [new_id[v] for v in sc.inputs]
        outs = [new_id[v] for v in sc.outputs]
        if prev_outputs is None:
            ident = {}
            shift = offset
        else:
            ident = {ins[i]: prev_outputs[i] for i in range(m)}
            shift = offset - m
        ids = {}
        for v in range(1, g2.n + 1):
            ids[v] = ident[v] if v in ident else v + shift
        edges += [(ids[u], ids[v]) for u, v in g2.edges]
        offset = max(ids.values())
        prev_outputs = [ids[v] for v in outs]
    g = Dag(offset, edges)
    prov = {"kind": SC_STACK, "m": m, "layers": layers, "seed": seed}
    return make_base(g.with_recipe(prov), prov)


def build_main(n_target: int, epsilon, seed: int = 0, base_kind: str = CERTIFIED,
               external: Dag | None = None, **dr_overrides) -> OverlayResult:
    """Pick or build a base graph of about ``n_target`` nodes and overlay it."""
    if base_kind not in BASE_KINDS:
        raise BaseGraphError(f"base kind must be one of {BASE_KINDS}")
    if base_kind == CERTIFIED:
        base = certified_small_base(n_target, seed)
    elif base_kind == SC_STACK:
        m = 2
        while _stack_layer_size(m + 1, seed) <= n_target:
            m += 1
        layers = max(1, n_target // _stack_layer_size(m, seed))
        base = superconcentrator_stack_base(m, layers, seed)
    else:
        if external is None:
            raise BaseGraphError("external base needs a graph")
        base = make_base(external, {"kind": EXTERNAL, "hash": external.graph_hash()})
    return overlay(base, epsilon, seed, **dr_overrides)
