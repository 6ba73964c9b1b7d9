"""Bipartite expanders and local expanders.

A bipartite graph on A = B = [m] is a delta-expander when every X in A and
Y in B with |X|, |Y| >= delta*m share an edge.  A DAG on [n] is a
delta-local expander when the same holds between I_r(x) = {x-r+1..x} and
I*_r(x) = {x+1..x+r} for every x and every r <= min(x, n-x).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .graph import Dag, NodeSet

SMALL_SCALE = 16
MAX_RESAMPLES = 1000
EXACT_BIPARTITE_LIMIT = 24


class TooLargeError(ValueError):
    """Exhaustive verification would be infeasible."""


def exact_ratio(x) -> Fraction:
    """Parse a ratio so that 0.4 means exactly 2/5."""
    if isinstance(x, Fraction):
        return x
    return Fraction(str(x))


def threshold(delta, r: int) -> int:
    """ceil(delta * r) computed exactly."""
    return math.ceil(exact_ratio(delta) * r)


def default_m(delta) -> int:
    return math.ceil(4 / exact_ratio(delta))


def default_degree(delta) -> int:
    d = float(exact_ratio(delta))
    return math.ceil(8 / d * math.log(math.e / d))


@dataclass(frozen=True)
class BipartiteExpander:
    m: int
    delta: float
    edges: tuple[tuple[int, int], ...]
    degree: int
    degree_cap: int
    seed: int
    verified: bool = False
    resamples: int = 0

    def neighbor_masks(self) -> list[int]:
        """B-neighbourhood bitmask of each A node (index 0 unused)."""
        out = [0] * (self.m + 1)
        for a, b in self.edges:
            out[a] |= 1 << (b - 1)
        return out


def _sample_edges(m: int, degree_cap: int, rng: random.Random,
                  complete: bool = False) -> tuple[tuple[int, int], ...]:
    edges = set()
    for b in range(1, m + 1):
        if complete or degree_cap >= m:
            chosen = range(1, m + 1)
        else:
            chosen = {rng.randrange(1, m + 1) for _ in range(degree_cap)}
        edges.update((a, b) for a in chosen)
    return tuple(sorted(edges))


def _max_degree(m: int, edges) -> int:
    deg = [0] * (m + 1)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    return max(deg, default=0)


def sample_bipartite(m: int, delta, degree_cap: int, seed: int) -> BipartiteExpander:
    """Each B node draws ``degree_cap`` A-parents with replacement.

    When the cap reaches m every A node is taken, giving the complete
    bipartite graph.  The result is not verified.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if not 0 < exact_ratio(delta) < 1:
        raise ValueError("delta must lie in (0, 1)")
    if degree_cap < 1:
        raise ValueError("degree_cap must be positive")
    edges = _sample_edges(m, degree_cap, random.Random(seed))
    return BipartiteExpander(m, float(delta), edges, _max_degree(m, edges), degree_cap, seed)


def verify_bipartite(t: BipartiteExpander) -> tuple[NodeSet, NodeSet] | None:
    """None if ``t`` expands, else a counterexample (X, Y) of size ceil(delta*m).

    Enumerates X only: X fails exactly when at least k B-nodes lie outside
    its neighbourhood, and the first k of those form Y.
    """
    if t.m > EXACT_BIPARTITE_LIMIT:
        raise TooLargeError(f"m={t.m} is too large for an exact check (limit {EXACT_BIPARTITE_LIMIT})")
    k = threshold(t.delta, t.m)
    nbr = t.neighbor_masks()
    full_b = (1 << t.m) - 1
    for xs in itertools.combinations(range(1, t.m + 1), k):
        reach = 0
        for a in xs:
            reach |= nbr[a]
        missed = full_b & ~reach
        if missed.bit_count() >= k:
            ys = list(NodeSet.from_mask(missed))[:k]
            return NodeSet(xs), NodeSet(ys)
    return None


def sample_verified(m: int, delta, degree_cap: int, seed: int) -> BipartiteExpander:
    """Resample from one seeded stream until the expander verifies.

    When ceil(delta*m) = 1 only the complete bipartite graph qualifies, so
    it is returned directly whatever the cap.
    """
    rng = random.Random(seed)
    forced = threshold(delta, m) == 1
    for attempt in range(MAX_RESAMPLES):
        edges = _sample_edges(m, degree_cap, rng, complete=forced)
        t = BipartiteExpander(m, float(delta), edges, _max_degree(m, edges), degree_cap, seed)
        if verify_bipartite(t) is None:
            return BipartiteExpander(t.m, t.delta, t.edges, t.degree, degree_cap, seed, True, attempt)
    raise RuntimeError(f"no verified expander for m={m} after {MAX_RESAMPLES} samples")


def scale_range(n: int, m_delta: int) -> list[int]:
    lo = int(math.floor(math.log2(m_delta))) + 1 if m_delta >= 1 else 1
    hi = int(math.floor(math.log2(n))) if n >= 1 else 0
    return list(range(lo, hi + 1))


def _scale_seed(seed: int, j: int) -> int:
    return seed * 1_000_003 + j


def build_local_expander(n: int, delta, seed: int = 0, *, m_delta: int | None = None,
                         degree_cap: int | None = None,
                         short_edge_span: int | None = None) -> Dag:
    """Local expander on [n] built from overlaid bipartite expanders.

    For each scale j, [n] is cut into blocks of size 2**j, and one sampled
    (delta/10)-expander on 2**j + 2**j nodes is laid over every block pair
    at distance 1..10 (a short final block keeps only its existing B-side
    nodes).  Scales with 2**j <= 16 use an exhaustively verified expander.
    Short edges (u, u+k) for k <= short_edge_span handle small radii.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    delta_q = exact_ratio(delta)
    if not 0 < delta_q < 1:
        raise ValueError("delta must lie in (0, 1)")
    inner = delta_q / 10
    m_delta = default_m(delta_q) if m_delta is None else m_delta
    cap = default_degree(inner) if degree_cap is None else degree_cap
    if short_edge_span is None:
        short_edge_span = max(default_m(inner), math.ceil(4 * math.log2(n))) if n > 1 else 1
    if short_edge_span < 1 or cap < 1 or m_delta < 1:
        raise ValueError("m_delta, degree_cap and short_edge_span must be positive")

    edges = set()
    scales = scale_range(n, m_delta)
    resamples = {}
    in_degrees = {}
    for j in scales:
        size = 1 << j
        blocks = -(-n // size)
        if blocks < 2:
            continue
        if size <= SMALL_SCALE:
            t = sample_verified(size, inner, cap, _scale_seed(seed, j))
            resamples[str(j)] = t.resamples
        else:
            t = sample_bipartite(size, inner, cap, _scale_seed(seed, j))
        b_deg = [0] * (size + 1)
        for _, b in t.edges:
            b_deg[b] += 1
        in_degrees[str(j)] = max(b_deg)
        for v in range(1, blocks + 1):
            a0 = (v - 1) * size
            for i in range(1, 11):
                if v + i > blocks:
                    break
                b0 = (v + i - 1) * size
                for a, b in t.edges:
                    if b0 + b <= n:
                        edges.add((a0 + a, b0 + b))
    for u in range(1, n + 1):
        for k in range(1, short_edge_span + 1):
            if u + k > n:
                break
            edges.add((u, u + k))
    recipe = {
        "kind": "local-expander",
        "n": n,
        "delta": float(delta),
        "seed": seed,
        "m_delta": m_delta,
        "degree_cap": cap,
        "scales": scales,
        "short_edge_span": short_edge_span,
        "verified_scale_resamples": resamples,
        "scale_in_degrees": in_degrees,
    }
    g = Dag(n, edges)
    recipe["indeg"] = g.indeg_cap
    return g.with_recipe(recipe)


def indegree_bound(recipe: dict) -> int:
    """10 * degree_cap * (number of scales) + short_edge_span."""
    return 10 * recipe["degree_cap"] * len(recipe["scales"]) + recipe["short_edge_span"]


def realized_indegree_bound(recipe: dict) -> int:
    """Same bound with each scale's realized B-side degree in place of the cap.

    Differs from ``indegree_bound`` only when a small scale was forced to
    be complete bipartite above a user-lowered cap.
    """
    return 10 * sum(recipe["scale_in_degrees"].values()) + recipe["short_edge_span"]


def verify_local_expander(g: Dag, delta, r_max: int | None = None, max_checks: int = 20_000_000):
    """None if local expansion holds for all x and r <= r_max, else (x, r, A, B).

    For each interval pair only the A-side subsets of size ceil(delta*r)
    are enumerated; B fails to exist exactly when the neighbourhood of A
    misses fewer than ceil(delta*r) nodes of I*_r(x).
    """
    n = g.n
    full_r = n // 2
    r_max = full_r if r_max is None else min(r_max, full_r)
    budget = 0
    for r in range(1, r_max + 1):
        xs = max(0, n - 2 * r + 1)
        budget += xs * math.comb(r, threshold(delta, r))
        if budget > max_checks:
            raise TooLargeError(f"verification up to r={r_max} needs more than {max_checks} subset checks")
    child = [g.child_mask(v) if 1 <= v <= n else 0 for v in range(n + 1)]
    for r in range(1, r_max + 1):
        k = threshold(delta, r)
        for x in range(r, n - r + 1):
            right = ((1 << r) - 1) << x
            left_nodes = range(x - r + 1, x + 1)
            for xs_ in itertools.combinations(left_nodes, k):
                reach = 0
                for a in xs_:
                    reach |= child[a]
                missed = right & ~reach
                if missed.bit_count() >= k:
                    ys = list(NodeSet.from_mask(missed))[:k]
                    return x, r, NodeSet(xs_), NodeSet(ys)
    return None
