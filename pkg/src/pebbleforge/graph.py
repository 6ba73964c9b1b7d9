"""Immutable topologically numbered DAGs and dense node sets.

Nodes are the integers 1..n and every edge (u, v) satisfies u < v, so
acyclicity holds by construction.  A ``NodeSet`` is an immutable bitmask in
which node ``v`` occupies bit ``v - 1``.
"""

from __future__ import annotations

import hashlib
import json
from typing import Iterable, Iterator, Sequence

GRAPH_FORMAT = "pebbleforge-dag/1"


class GraphError(ValueError):
    """Raised for malformed graphs or out-of-range nodes."""


class NodeSet:
    """Immutable set of positive node ids backed by an int bitmask."""

    __slots__ = ("mask",)

    def __init__(self, members: Iterable[int] = ()):
        if isinstance(members, NodeSet):
            self.mask = members.mask
            return
        mask = 0
        for v in members:
            v = int(v)
            if v < 1:
                raise GraphError(f"node ids start at 1, got {v}")
            mask |= 1 << (v - 1)
        self.mask = mask

    @classmethod
    def from_mask(cls, mask: int) -> "NodeSet":
        obj = cls.__new__(cls)
        obj.mask = int(mask)
        return obj

    @classmethod
    def interval(cls, lo: int, hi: int) -> "NodeSet":
        """Nodes lo..hi inclusive (empty when hi < lo)."""
        lo = max(lo, 1)
        if hi < lo:
            return cls.from_mask(0)
        return cls.from_mask(((1 << (hi - lo + 1)) - 1) << (lo - 1))

    def __iter__(self) -> Iterator[int]:
        m = self.mask
        while m:
            low = m & -m
            yield low.bit_length()
            m ^= low

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def __contains__(self, v: object) -> bool:
        return isinstance(v, int) and v >= 1 and (self.mask >> (v - 1)) & 1 == 1

    def _coerce(self, other) -> int:
        if isinstance(other, NodeSet):
            return other.mask
        return NodeSet(other).mask

    def __or__(self, other) -> "NodeSet":
        return NodeSet.from_mask(self.mask | self._coerce(other))

    def __and__(self, other) -> "NodeSet":
        return NodeSet.from_mask(self.mask & self._coerce(other))

    def __sub__(self, other) -> "NodeSet":
        return NodeSet.from_mask(self.mask & ~self._coerce(other))

    def __xor__(self, other) -> "NodeSet":
        return NodeSet.from_mask(self.mask ^ self._coerce(other))

    __ror__ = __or__
    __rand__ = __and__

    def __le__(self, other) -> bool:
        return self.mask & ~self._coerce(other) == 0

    def __ge__(self, other) -> bool:
        return self._coerce(other) & ~self.mask == 0

    def __eq__(self, other) -> bool:
        if isinstance(other, NodeSet):
            return self.mask == other.mask
        if isinstance(other, (set, frozenset)):
            try:
                return self.mask == NodeSet(other).mask
            except (GraphError, TypeError, ValueError):
                return False
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self))

    def __repr__(self) -> str:
        return "NodeSet({" + ", ".join(map(str, self)) + "})"

    def to_list(self) -> list[int]:
        return list(self)

    def max(self) -> int:
        return self.mask.bit_length()

    def min(self) -> int:
        return (self.mask & -self.mask).bit_length()

    def isdisjoint(self, other) -> bool:
        return self.mask & self._coerce(other) == 0


def as_nodeset(s) -> NodeSet:
    return s if isinstance(s, NodeSet) else NodeSet(s)


class Dag:
    """A DAG on [n] (or on a subset of it, for views) with u < v on every edge.

    ``vertices`` restricts the graph to a subset of [n] while keeping the
    original node ids; ``remove`` and ``induced`` produce such views.
    """

    __slots__ = (
        "n", "edges", "recipe", "indeg_cap", "_vmask",
        "_parents", "_children", "_pmask", "_cmask",
    )

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = (), *,
                 recipe: dict | None = None, vertices: NodeSet | Iterable[int] | None = None):
        n = int(n)
        if n < 0:
            raise GraphError(f"node count must be non-negative, got {n}")
        full = (1 << n) - 1
        if vertices is None:
            vmask = full
        else:
            vmask = as_nodeset(vertices).mask
            if vmask & ~full:
                raise GraphError("vertex set exceeds [n]")
        parents: list[list[int]] = [[] for _ in range(n + 1)]
        children: list[list[int]] = [[] for _ in range(n + 1)]
        pmask = [0] * (n + 1)
        cmask = [0] * (n + 1)
        seen = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphError(f"edge ({u},{v}) leaves [1,{n}]")
            if u >= v:
                raise GraphError(f"edge ({u},{v}) violates topological order u < v")
            if (u, v) in seen:
                raise GraphError(f"duplicate edge ({u},{v})")
            if not ((vmask >> (u - 1)) & 1 and (vmask >> (v - 1)) & 1):
                raise GraphError(f"edge ({u},{v}) touches a node outside the vertex set")
            seen.add((u, v))
            pmask[v] |= 1 << (u - 1)
            cmask[u] |= 1 << (v - 1)
        for v in range(1, n + 1):
            parents[v] = [u for u in NodeSet.from_mask(pmask[v])]
            children[v] = [w for w in NodeSet.from_mask(cmask[v])]
        self.n = n
        self._vmask = vmask
        self.edges = tuple(sorted(seen))
        self._parents = tuple(tuple(p) for p in parents)
        self._children = tuple(tuple(c) for c in children)
        self._pmask = tuple(pmask)
        self._cmask = tuple(cmask)
        self.indeg_cap = max((len(p) for p in parents), default=0)
        self.recipe = json.loads(json.dumps(recipe)) if recipe is not None else None

    # -- basic accessors -------------------------------------------------
    def _check(self, v: int) -> None:
        if not (1 <= v <= self.n) or not (self._vmask >> (v - 1)) & 1:
            raise GraphError(f"node {v} is not in the graph")

    @property
    def is_view(self) -> bool:
        return self._vmask != (1 << self.n) - 1

    def nodes(self) -> NodeSet:
        return NodeSet.from_mask(self._vmask)

    def node_list(self) -> list[int]:
        return list(NodeSet.from_mask(self._vmask))

    @property
    def size(self) -> int:
        return self._vmask.bit_count()

    def parents(self, v: int) -> NodeSet:
        self._check(v)
        return NodeSet.from_mask(self._pmask[v])

    def children(self, v: int) -> NodeSet:
        self._check(v)
        return NodeSet.from_mask(self._cmask[v])

    def parent_list(self, v: int) -> tuple[int, ...]:
        """Parents in ascending order (no range check; hot path)."""
        return self._parents[v]

    def child_list(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    def parent_mask(self, v: int) -> int:
        return self._pmask[v]

    def child_mask(self, v: int) -> int:
        return self._cmask[v]

    def indeg(self, v: int | None = None) -> int:
        """Indegree of ``v``, or of the whole graph when ``v`` is omitted."""
        if v is None:
            return self.indeg_cap
        self._check(v)
        return len(self._parents[v])

    def sources(self) -> NodeSet:
        return NodeSet(v for v in self.node_list() if not self._pmask[v])

    def sinks(self) -> NodeSet:
        return NodeSet(v for v in self.node_list() if not self._cmask[v])

    # -- reachability ----------------------------------------------------
    def ancestors(self, t) -> NodeSet:
        """Nodes with a directed path of length >= 1 into ``t``.

        Members of ``t`` appear only if they are ancestors of another member.
        """
        t = as_nodeset(t)
        for v in t:
            self._check(v)
        out = 0
        stack = []
        for v in t:
            stack.append(v)
        while stack:
            v = stack.pop()
            fresh = self._pmask[v] & ~out
            out |= fresh
            stack.extend(NodeSet.from_mask(fresh))
        return NodeSet.from_mask(out)

    def ancestors_closed(self, t) -> NodeSet:
        t = as_nodeset(t)
        return self.ancestors(t) | t

    def descendants(self, t) -> NodeSet:
        t = as_nodeset(t)
        out = 0
        stack = list(t)
        while stack:
            v = stack.pop()
            fresh = self._cmask[v] & ~out
            out |= fresh
            stack.extend(NodeSet.from_mask(fresh))
        return NodeSet.from_mask(out)

    # -- depth -----------------------------------------------------------
    def _depth_table(self, keep_mask: int) -> list[int]:
        d = [0] * (self.n + 1)
        for v in range(1, self.n + 1):
            if (keep_mask >> (v - 1)) & 1:
                best = 0
                for u in self._parents[v]:
                    if d[u] > best:
                        best = d[u]
                d[v] = best + 1
        return d

    def depth(self) -> int:
        """Number of nodes on a longest directed path (0 for an empty graph)."""
        return max(self._depth_table(self._vmask), default=0)

    def depth_of_subgraph(self, keep) -> int:
        keep_mask = as_nodeset(keep).mask & self._vmask
        return max(self._depth_table(keep_mask), default=0)

    def longest_path(self, keep=None) -> list[int]:
        """A longest path (as a node list) inside ``keep`` (default: all nodes)."""
        keep_mask = self._vmask if keep is None else as_nodeset(keep).mask & self._vmask
        d = self._depth_table(keep_mask)
        if not any(d):
            return []
        v = max(range(1, self.n + 1), key=lambda x: (d[x], -x))
        path = [v]
        while d[v] > 1:
            v = next(u for u in self._parents[v] if d[u] == d[v] - 1)
            path.append(v)
        return path[::-1]

    # -- views -----------------------------------------------------------
    def _view(self, vmask: int) -> "Dag":
        edges = [(u, v) for (u, v) in self.edges
                 if (vmask >> (u - 1)) & 1 and (vmask >> (v - 1)) & 1]
        return Dag(self.n, edges, recipe=self.recipe, vertices=NodeSet.from_mask(vmask))

    def remove(self, s) -> "Dag":
        """G - S, keeping original node ids."""
        s = as_nodeset(s)
        if s.mask & self._vmask == 0:
            return self
        return self._view(self._vmask & ~s.mask)

    def induced(self, s) -> "Dag":
        """G[S], keeping original node ids."""
        return self._view(self._vmask & as_nodeset(s).mask)

    # -- identity, IO ----------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return (self.n, self._vmask, self.edges) == (other.n, other._vmask, other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self._vmask, self.edges))

    def __repr__(self) -> str:
        return f"Dag(n={self.n}, edges={len(self.edges)}, indeg={self.indeg_cap})"

    def with_recipe(self, recipe: dict | None) -> "Dag":
        vertices = NodeSet.from_mask(self._vmask) if self.is_view else None
        return Dag(self.n, self.edges, recipe=recipe, vertices=vertices)

    def to_document(self) -> dict:
        doc = {
            "format": GRAPH_FORMAT,
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "recipe": self.recipe,
        }
        if self.is_view:
            doc["vertices"] = self.node_list()
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True, separators=(",", ":")) + "\n"

    def graph_hash(self) -> str:
        """Digest of the structure only (recipe excluded)."""
        doc = {"n": self.n, "edges": [list(e) for e in self.edges]}
        if self.is_view:
            doc["vertices"] = self.node_list()
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def to_dot(self) -> str:
        lines = ["digraph G {", "  rankdir=LR;"]
        for v in self.node_list():
            lines.append(f"  {v};")
        for u, v in self.edges:
            lines.append(f"  {u} -> {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_document(cls, doc: dict) -> "Dag":
        if not isinstance(doc, dict) or doc.get("format") != GRAPH_FORMAT:
            raise GraphError(f"not a {GRAPH_FORMAT} document")
        try:
            n = int(doc["n"])
            edges = [(int(u), int(v)) for u, v in doc["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"malformed graph document: {exc}") from exc
        return cls(n, edges, recipe=doc.get("recipe"), vertices=doc.get("vertices"))

    @classmethod
    def from_json(cls, text: str) -> "Dag":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphError(f"invalid JSON: {exc}") from exc
        return cls.from_document(doc)

    def validate(self) -> None:
        """Re-check the structural invariants; raises ``GraphError``."""
        problems = edge_problems(self.n, self.edges)
        if problems:
            raise GraphError(problems[0])
        if self.indeg_cap != max((len(p) for p in self._parents), default=0):
            raise GraphError("cached indegree is stale")


def edge_problems(n: int, edges: Iterable[Sequence[int]]) -> list[str]:
    """All structural problems of a raw edge list, without raising."""
    problems = []
    seen = set()
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if not (1 <= u <= n and 1 <= v <= n):
            problems.append(f"edge ({u},{v}) leaves [1,{n}]")
        elif u == v:
            problems.append(f"self-loop at {u}")
        elif u > v:
            problems.append(f"edge ({u},{v}) violates topological order u < v")
        if (u, v) in seen:
            problems.append(f"duplicate edge ({u},{v})")
        seen.add((u, v))
    return problems


def load_graph(path) -> Dag:
    with open(path, "r", encoding="utf-8") as fh:
        return Dag.from_json(fh.read())


def save_graph(g: Dag, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(g.to_json())
