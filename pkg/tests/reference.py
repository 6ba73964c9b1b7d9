"""Independent slow reference implementations used as second routes in tests.

None of these share code with the package beyond the Dag accessors.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import struct
from fractions import Fraction


def path_enum_depth(g, alive=None) -> int:
    """Longest path (in nodes) by explicit DFS over every path."""
    nodes = [v for v in range(1, g.n + 1) if (alive is None or v in alive) and v in g.nodes()]
    alive_set = set(nodes)
    best = 0

    def walk(v, length):
        nonlocal best
        best = max(best, length)
        for w in g.child_list(v):
            if w in alive_set:
                walk(w, length + 1)

    for v in nodes:
        walk(v, 1)
    return best


def min_depth_after_removal(g, e: int) -> int:
    nodes = g.node_list()
    if e >= len(nodes):
        return 0
    return min(path_enum_depth(g, set(nodes) - set(s)) for s in itertools.combinations(nodes, e))


def is_legal(g, steps, sequential: bool, targets=None) -> bool:
    """Direct reading of the black pebbling rules on a list of sets."""
    steps = [set(s) for s in steps]
    if not steps or steps[0]:
        return False
    targets = set(g.sinks()) if targets is None else set(targets)
    for prev, cur in zip(steps, steps[1:]):
        new = cur - prev
        if sequential and len(new) > 1:
            return False
        for v in new:
            if not set(g.parent_list(v)) <= prev:
                return False
        if not cur <= set(g.nodes()):
            return False
    seen = set().union(*steps)
    return targets <= seen


def _successors(g, conf: frozenset, sequential: bool):
    ready = [v for v in g.node_list() if set(g.parent_list(v)) <= conf and v not in conf]
    keep_opts = [frozenset(c) for r in range(len(conf) + 1) for c in itertools.combinations(sorted(conf), r)]
    if sequential:
        new_opts = [frozenset()] + [frozenset([v]) for v in ready]
    else:
        new_opts = [frozenset(c) for r in range(len(ready) + 1) for c in itertools.combinations(ready, r)]
    for k in keep_opts:
        for x in new_opts:
            yield k | x


def optimum(g, objective: str, sequential: bool, s: int | None = None) -> int:
    """Exact optimum by uniform-cost search over (configuration, covered targets).

    Enumerates every legal next configuration, with no pruning.  ``space``
    uses bottleneck (max) cost, the others additive per-step cost.
    """
    targets = frozenset(g.sinks())
    start = (frozenset(), frozenset())
    if not targets:
        return 0
    dist = {start: 0}
    heap = [(0, 0, start)]
    tie = 0
    while heap:
        d, _, state = heapq.heappop(heap)
        if d > dist[state]:
            continue
        conf, cov = state
        if cov == targets:
            return d
        for nxt in _successors(g, conf, sequential):
            size = len(nxt)
            if objective == "space":
                nd = max(d, size)
            elif objective == "cc":
                nd = d + size
            elif objective == "ss":
                nd = d + (1 if size >= s else 0)
            else:
                nd = d + 1
            st = (nxt, cov | (nxt & targets))
            if nd < dist.get(st, 1 << 60):
                dist[st] = nd
                tie += 1
                heapq.heappush(heap, (nd, tie, st))
    raise AssertionError("no complete pebbling found")


def good_nodes(n: int, s, gamma, strict: bool = True) -> set[int]:
    """gamma-good nodes by direct interval counting with exact rationals."""
    gamma = Fraction(gamma)
    s = set(s)
    out = set()
    for x in range(1, n + 1):
        ok = True
        left_radii = range(1, x + 1) if strict else range(1, max(x - 1, n - x) + 1)
        right_radii = range(1, n - x + 1) if strict else range(1, max(x - 1, n - x) + 1)
        for r in left_radii:
            iv = [y for y in range(x - r + 1, x + 1) if y >= 1]
            if len([y for y in iv if y not in s]) < gamma * len(iv):
                ok = False
        for r in right_radii:
            iv = [y for y in range(x + 1, x + r + 1) if y <= n]
            if iv and len([y for y in iv if y not in s]) < gamma * len(iv):
                ok = False
        if ok:
            out.add(x)
    return out


def local_expansion_counterexample(g, delta, r_max):
    """Enumerate both sides of every interval pair; returns (x, r) or None."""
    delta = Fraction(str(delta))
    for r in range(1, r_max + 1):
        k = -(-delta * r // 1)
        k = int(k)
        for x in range(r, g.n - r + 1):
            left = range(x - r + 1, x + 1)
            right = range(x + 1, x + r + 1)
            for a in itertools.combinations(left, k):
                for b in itertools.combinations(right, k):
                    if not any(v in g.child_list(u) for u in a for v in b):
                        return x, r
    return None


def bipartite_counterexample(m, delta, edges):
    delta = Fraction(str(delta))
    k = int(-(-delta * m // 1))
    es = set(edges)
    for xs in itertools.combinations(range(1, m + 1), k):
        for ys in itertools.combinations(range(1, m + 1), k):
            if not any((a, b) in es for a in xs for b in ys):
                return set(xs), set(ys)
    return None


def _field(b: bytes) -> bytes:
    return struct.pack(">Q", len(b)) + b


def _fields(parts) -> bytes:
    return struct.pack(">I", len(parts)) + b"".join(_field(p) for p in parts)


def recursive_labels(g, x, h) -> list[bytes]:
    """Sink labels by memoized recursion from the sinks downward."""
    sources = [v for v in range(1, g.n + 1) if not g.parent_list(v)]
    rank = {v: j for j, v in enumerate(sources)}
    x_enc = _fields(list(x))
    memo = {}

    def lab(v):
        if v not in memo:
            if v in rank:
                inputs = [x[rank[v]]]
            else:
                inputs = [lab(u) for u in sorted(g.parent_list(v))]
            memo[v] = h(_fields([x_enc, struct.pack(">Q", v)] + inputs))
        return memo[v]

    sinks = [v for v in range(1, g.n + 1) if not g.child_list(v)]
    return [lab(v) for v in sinks]


def sha256_truncated(data: bytes, w: int) -> bytes:
    digest = hashlib.sha256(data).digest()
    value = int.from_bytes(digest, "big") >> (256 - w)
    nbytes = (w + 7) // 8
    return (value << (nbytes * 8 - w)).to_bytes(nbytes, "big")
