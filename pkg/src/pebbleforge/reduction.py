"""Indegree reductions to indegree 2 and the pebbling projection back.

Both transforms replace every node v by a path of fresh nodes (its
metanode) whose last node, the terminal, carries v's outgoing edges.  The
i-th parent of v in ascending order feeds the i-th node of v's metanode.

* ``reduce_dr`` uses paths of length 2*delta for every node, where delta is
  the indegree of the whole graph; depth-robustness carries over with
  depth scaled by delta.
* ``reduce_ss`` uses paths of length max(indeg(v), 1); sustained space
  carries over with the threshold divided by delta - 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Dag, NodeSet
from .pebbling import Pebbling, PebblingError, validate

DR = "dr"
SS = "ss"


@dataclass(frozen=True)
class ReductionMap:
    kind: str
    source: Dag
    derived: Dag
    ranges: tuple[tuple[int, int], ...]   # index v -> (first, last) derived id
    delta: int

    def metanode(self, v: int) -> range:
        lo, hi = self.ranges[v]
        return range(lo, hi + 1)

    def terminal(self, v: int) -> int:
        return self.ranges[v][1]

    def node(self, v: int, j: int) -> int:
        """Derived id of the j-th node (1-based) on v's metanode."""
        lo, hi = self.ranges[v]
        if not 1 <= j <= hi - lo + 1:
            raise ValueError(f"metanode of {v} has no position {j}")
        return lo + j - 1

    def genesis(self, derived_node: int) -> tuple[int, int]:
        """(v, j) such that ``derived_node`` is the j-th node of v's metanode."""
        lo, hi = 1, self.source.n
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.ranges[mid][0] <= derived_node:
                lo = mid
            else:
                hi = mid - 1
        first, last = self.ranges[lo]
        if not first <= derived_node <= last:
            raise ValueError(f"derived node {derived_node} is out of range")
        return lo, derived_node - first + 1

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "delta": self.delta,
            "source_hash": self.source.graph_hash(),
            "derived_hash": self.derived.graph_hash(),
            "metanodes": {str(v): {"first": lo, "terminal": hi}
                          for v, (lo, hi) in enumerate(self.ranges) if v},
        }


def _require_full(g: Dag) -> None:
    if g.is_view:
        raise ValueError("indegree reductions need a full graph, not a view")


def _build(g: Dag, lengths: list[int], kind: str, delta: int) -> ReductionMap:
    ranges = [(0, 0)]
    nxt = 1
    for v in range(1, g.n + 1):
        ranges.append((nxt, nxt + lengths[v] - 1))
        nxt += lengths[v]
    edges = []
    for v in range(1, g.n + 1):
        lo, hi = ranges[v]
        edges += [(w, w + 1) for w in range(lo, hi)]
        for i, u in enumerate(g.parent_list(v), start=1):
            edges.append((ranges[u][1], lo + i - 1))
    recipe = {"kind": f"reduce-{kind}", "source_hash": g.graph_hash(), "delta": delta}
    h = Dag(nxt - 1, edges, recipe=recipe)
    return ReductionMap(kind, g, h, tuple(ranges), delta)


def reduce_dr(g: Dag) -> tuple[Dag, ReductionMap]:
    """Depth-robustness preserving reduction on 2*n*delta nodes."""
    _require_full(g)
    delta = max(g.indeg_cap, 1)
    m = _build(g, [0] + [2 * delta] * g.n, DR, delta)
    return m.derived, m


def reduce_ss(g: Dag) -> tuple[Dag, ReductionMap]:
    """Sustained-space preserving reduction with per-node path lengths."""
    _require_full(g)
    lengths = [0] + [max(len(g.parent_list(v)), 1) for v in range(1, g.n + 1)]
    m = _build(g, lengths, SS, max(g.indeg_cap, 1))
    return m.derived, m


def project_configuration(m: ReductionMap, conf: NodeSet) -> NodeSet:
    g = m.source
    out = 0
    for w in conf:
        v, j = m.genesis(w)
        length = m.ranges[v][1] - m.ranges[v][0] + 1
        if j == length:
            out |= 1 << (v - 1)
        else:
            for u in g.parent_list(v)[:j]:
                out |= 1 << (u - 1)
    return NodeSet.from_mask(out)


def project_pebbling(m: ReductionMap, p: Pebbling) -> Pebbling:
    """Map a legal pebbling of the derived graph to one of the source graph.

    A terminal pebble on v's metanode pebbles v; a pebble on the j-th
    non-terminal node pebbles v's first j parents.  Each derived pebble thus
    yields at most max(1, delta - 1) source pebbles.
    """
    if m.kind != SS:
        raise ValueError("projection is defined for the sustained-space reduction")
    bad = validate(m.derived, p)
    if bad is not None:
        raise PebblingError(bad)
    steps = tuple(project_configuration(m, c) for c in p.steps)
    return Pebbling(steps, p.mode)


def lift_path(m: ReductionMap, path: list[int]) -> list[int]:
    """Derived path through the terminal of every node on a source path.

    Walks the whole metanode of the first node, then for each later node
    enters at the position of its predecessor among its parents and runs
    to its terminal.
    """
    g = m.source
    if not path:
        return []
    for u, v in zip(path, path[1:]):
        if u not in g.parent_list(v):
            raise ValueError(f"({u},{v}) is not an edge of the source graph")
    out = list(m.metanode(path[0]))
    for u, v in zip(path, path[1:]):
        i = g.parent_list(v).index(u) + 1
        out += list(range(m.node(v, i), m.terminal(v) + 1))
    return out


def is_path(g: Dag, nodes: list[int]) -> bool:
    return all(u in g.parent_list(v) for u, v in zip(nodes, nodes[1:]))
