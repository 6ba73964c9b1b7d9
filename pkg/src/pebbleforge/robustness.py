"""Depth-robustness checks, gamma-good nodes and the extreme depth-robust builder."""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as K
from ._arrays import csr_parents
from .expander import build_local_expander, exact_ratio
from .graph import Dag, NodeSet, as_nodeset

EXACT_SUBSET_LIMIT = 250_000


class DepthRobustnessError(ValueError):
    """Exact check would exceed the configured enumeration budget."""


@dataclass(frozen=True)
class DepthRobustnessVerdict:
    e: int
    d: int
    holds: bool
    witness: NodeSet | None
    method: str
    min_depth: int | None = None
    checked: int = 0

    def to_dict(self) -> dict:
        return {
            "e": self.e, "d": self.d, "holds": self.holds, "method": self.method,
            "witness": self.witness.to_list() if self.witness is not None else None,
            "min_depth": self.min_depth, "checked": self.checked,
        }


def _removal_scan(g: Dag, e: int, stop_below: int, max_subsets: int):
    nodes = g.node_list()
    count = math.comb(len(nodes), e)
    if count > max_subsets:
        raise DepthRobustnessError(
            f"C({len(nodes)},{e}) = {count} removal sets exceed the limit {max_subsets}")
    ptr, idx, absent = csr_parents(g)
    cand = np.array([v - 1 for v in nodes], dtype=np.int64)
    best, wit, checked = K.min_depth_removing(ptr, idx, g.n, absent, cand, e, stop_below)
    return int(best), NodeSet(int(x) + 1 for x in wit), int(checked)


def min_depth_after_removal(g: Dag, e: int, max_subsets: int = EXACT_SUBSET_LIMIT) -> tuple[int, NodeSet]:
    """Smallest depth(G - S) over |S| = e, with the lexicographically first minimiser."""
    if e <= 0:
        return g.depth(), NodeSet()
    if e >= g.size:
        return 0, g.nodes()
    best, wit, _ = _removal_scan(g, e, -1, max_subsets)
    return best, wit


def check_depth_robust_exact(g: Dag, e: int, d: int,
                             max_subsets: int = EXACT_SUBSET_LIMIT) -> DepthRobustnessVerdict:
    """Exact (e, d) check over all removal sets of size exactly e.

    Smaller sets are covered because removing extra nodes never increases
    the depth.  The witness is the first set (lexicographically) that
    leaves depth below d.
    """
    if e < 0:
        raise ValueError("e must be non-negative")
    if e == 0:
        dep = g.depth()
        return DepthRobustnessVerdict(e, d, dep >= d, None if dep >= d else NodeSet(), "exact", dep, 1)
    if e >= g.size:
        return DepthRobustnessVerdict(e, d, d <= 0, None if d <= 0 else g.nodes(), "exact", 0, 1)
    best, wit, checked = _removal_scan(g, e, d, max_subsets)
    if best < d:
        return DepthRobustnessVerdict(e, d, False, wit, "exact", best, checked)
    return DepthRobustnessVerdict(e, d, True, None, "exact", best, checked)


def check_depth_robust_sampled(g: Dag, e: int, d: int, samples: int = 1000,
                               seed: int = 0) -> DepthRobustnessVerdict:
    """Monte-Carlo check: random e-sets plus the greedy reducer.

    ``holds`` only means no counterexample was found.
    """
    from .strategies import depth_reduce_set

    rng = random.Random(seed)
    nodes = g.node_list()
    e_eff = min(e, len(nodes))
    greedy = depth_reduce_set(g, max(d - 1, 0), "greedy") if d >= 1 else NodeSet()
    candidates = []
    if len(greedy) <= e:
        candidates.append(greedy)
    for _ in range(samples):
        candidates.append(NodeSet(rng.sample(nodes, e_eff)))
    best = None
    for s in candidates:
        dep = g.remove(s).depth()
        if best is None or dep < best:
            best = dep
        if dep < d:
            return DepthRobustnessVerdict(e, d, False, s, "sampled", dep, len(candidates))
    return DepthRobustnessVerdict(e, d, True, None, "sampled", best, len(candidates))


# -- gamma-good nodes -----------------------------------------------------

@dataclass(frozen=True)
class GoodNodeReport:
    gamma: Fraction
    removed: NodeSet
    good: NodeSet
    bound: Fraction
    mode: str = "strict"

    def to_dict(self) -> dict:
        return {
            "gamma": str(self.gamma), "removed": self.removed.to_list(),
            "good": self.good.to_list(), "good_count": len(self.good),
            "bound": str(self.bound), "mode": self.mode,
        }


def good_node_bound(n: int, removed: int, gamma) -> Fraction:
    gamma = exact_ratio(gamma)
    return Fraction(n) - removed * (1 + gamma) / (1 - gamma)


def gamma_good(g: Dag, s, gamma, mode: str = "strict") -> GoodNodeReport:
    """Nodes x whose intervals keep a gamma fraction outside S at every radius.

    ``strict`` checks I_r(x) for r <= x and I*_r(x) for r <= n - x, the
    radii at which the whole interval fits.  ``truncated`` checks every r up
    to max(x-1, n-x) with intervals clipped to [1, n] and their clipped
    sizes as denominators.
    """
    gamma_q = exact_ratio(gamma)
    if not 0 < gamma_q < 1:
        raise ValueError("gamma must lie in (0, 1)")
    if mode not in ("strict", "truncated"):
        raise ValueError("mode must be strict or truncated")
    s = as_nodeset(s)
    n = g.n
    num, den = gamma_q.numerator, gamma_q.denominator
    ind = np.zeros(n + 1, dtype=np.int64)
    for v in s:
        if v <= n:
            ind[v] = 1
    pre = np.cumsum(ind)
    good = 0
    for x in range(1, n + 1):
        if mode == "strict":
            left_sizes = np.arange(1, x + 1)
            right_sizes = np.arange(1, n - x + 1)
        else:
            top = max(x - 1, n - x)
            radii = np.arange(1, top + 1)
            left_sizes = np.unique(np.minimum(radii, x))
            right_sizes = np.unique(np.minimum(radii, n - x))
            right_sizes = right_sizes[right_sizes > 0]
        # |I \ S| >= gamma |I|  <=>  (size - hits) * den >= num * size
        hits_left = pre[x] - pre[x - left_sizes]
        if np.any((left_sizes - hits_left) * den < num * left_sizes):
            continue
        hits_right = pre[x + right_sizes] - pre[x]
        if np.any((right_sizes - hits_right) * den < num * right_sizes):
            continue
        good |= 1 << (x - 1)
    return GoodNodeReport(gamma_q, s, NodeSet.from_mask(good), good_node_bound(n, len(s), gamma_q), mode)


def _reach_masks(g: Dag, alive: int) -> list[int]:
    """reach[v] = nodes reachable from v (v included) inside ``alive``."""
    reach = [0] * (g.n + 1)
    for v in range(g.n, 0, -1):
        if not (alive >> (v - 1)) & 1:
            continue
        m = 1 << (v - 1)
        for w in g.child_list(v):
            m |= reach[w]
        reach[v] = m
    return reach


def connectivity_precondition(gamma, delta) -> bool:
    return exact_ratio(delta) < min(exact_ratio(gamma) / 2, Fraction(1, 4))


def check_good_connectivity(g: Dag, s, gamma, delta) -> tuple[int, int] | None:
    """None if every pair of gamma-good x < y is joined by a path in G - S.

    Emits a warning (and still runs) when delta >= min(gamma/2, 1/4).
    """
    if not connectivity_precondition(gamma, delta):
        warnings.warn("delta >= min(gamma/2, 1/4): connectivity is not guaranteed", stacklevel=2)
    s = as_nodeset(s)
    good = list(gamma_good(g, s, gamma).good)
    reach = _reach_masks(g, g.nodes().mask & ~s.mask)
    for i, x in enumerate(good):
        for y in good[i + 1:]:
            if not (reach[x] >> (y - 1)) & 1:
                return x, y
    return None


def reachable_fraction(g: Dag, s, x: int, r: int) -> tuple[int, int]:
    """(forward, backward) reachability counts around x inside G - S.

    forward counts nodes of I*_r(x) minus S reachable from x; backward
    counts nodes of I_r(x) minus S that reach x (x itself included when it
    survives).  Intervals are clipped to [1, n].
    """
    if not 1 <= x <= g.n or r < 0:
        raise ValueError("x must be a node and r non-negative")
    s = as_nodeset(s)
    alive = g.nodes().mask & ~s.mask
    if not (alive >> (x - 1)) & 1:
        return 0, 0
    fwd_iv = NodeSet.interval(x + 1, min(x + r, g.n)).mask & alive
    back_iv = NodeSet.interval(max(1, x - r + 1), x).mask & alive
    reach = _reach_masks(g, alive)
    forward = (reach[x] & fwd_iv).bit_count()
    backward = sum(1 for v in NodeSet.from_mask(back_iv) if (reach[v] >> (x - 1)) & 1)
    return forward, backward


def unreachable_counts(g: Dag, s, x: int, r: int) -> tuple[int, int]:
    """Nodes of I*_r(x) - S not reached from x, and of I_r(x) - S not reaching x."""
    s = as_nodeset(s)
    alive = g.nodes().mask & ~s.mask
    fwd_total = (NodeSet.interval(x + 1, min(x + r, g.n)).mask & alive).bit_count()
    back_total = (NodeSet.interval(max(1, x - r + 1), x).mask & alive).bit_count()
    f, b = reachable_fraction(g, s, x, r)
    return fwd_total - f, back_total - b


# -- extreme depth-robust graphs -----------------------------------------

def dr_claim_depth(n: int, e: int, epsilon) -> Fraction:
    """Claimed depth n - e(1+gamma)/(1-gamma) after removing e nodes, gamma = epsilon/4."""
    gamma = exact_ratio(epsilon) / 4
    return Fraction(n) - e * (1 + gamma) / (1 - gamma)


def build_extreme_dr(n: int, epsilon, seed: int = 0, **overrides) -> Dag:
    """Local expander with delta = epsilon/10; the recipe records the claim."""
    eps = exact_ratio(epsilon)
    if not 0 < eps <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    g = build_local_expander(n, eps / 10, seed, **overrides)
    recipe = dict(g.recipe)
    recipe["delta"] = float(eps / 10)
    recipe.update({
        "kind": "extreme-dr",
        "epsilon": float(epsilon),
        "gamma": float(eps / 4),
        "claim": "(e, n - e(1+gamma)/(1-gamma))-depth-robust for every e",
    })
    return g.with_recipe(recipe)


def unpebbled_ancestor_depth(g: Dag, pebbles, t) -> int:
    """Depth of the unpebbled closed ancestors of t, within G - pebbles."""
    pebbles = as_nodeset(pebbles)
    h = g.remove(pebbles)
    live_t = as_nodeset(t) - pebbles
    if not live_t:
        return 0
    return h.depth_of_subgraph(h.ancestors_closed(live_t))
