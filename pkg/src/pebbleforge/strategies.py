"""Constructive pebbling strategies and exact brute-force oracles.

The black-pebbling oracles search the configuration graph with the compiled
kernel in ``_kernels``.  A search state is the current configuration on
non-sink nodes plus the set of sinks covered so far; a pebble on a sink has
no use beyond covering it, so sinks never persist in the state.

Successors are pruned by dominance.  Starting from a superset configuration
(with a superset of covered sinks) any continuation stays legal at equal
cost, so the optimal cost-to-go is antitone in the state.  Hence:

* parallel moves only choose subsets of P u frontier(P); placing a node
  whose parents are missing is illegal anyway;
* for s-sustained space, the only parallel moves needed are the full
  available set (cost 1 if it reaches s) and every (s-1)-subset (cost 0);
* for the space threshold k, only subsets of size min(k, |available|);
* sequential moves always place a fresh pebble; a removal-only step can be
  merged into the following placement at no extra cost.

Cumulative cost enumerates every successor.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._arrays import csr_parents, parent_masks
from .graph import Dag, NodeSet, as_nodeset
from .pebbling import (
    PARALLEL, SEQUENTIAL, BwPebbling, Pebbling, metrics, require_legal, validate_bw,
)

OBJECTIVES = ("space", "cc", "ss", "time")
DEFAULT_CAPS = {SEQUENTIAL: 14, PARALLEL: 12}
HARD_NODE_LIMIT = 24


class OracleCapError(RuntimeError):
    """The instance exceeds the configured oracle limits."""


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_nodes: int | None = None
    max_states: int = -1


@dataclass(frozen=True)
class OracleResult:
    objective: str
    mode: str
    value: int | None
    witness: Pebbling | BwPebbling | None
    explored_states: int
    threshold: int | None = None
    exact: bool = True
    lower_bound: int | None = None

    def to_dict(self, g: Dag | None = None) -> dict:
        return {
            "objective": self.objective, "mode": self.mode, "threshold": self.threshold,
            "value": self.value, "exact": self.exact, "lower_bound": self.lower_bound,
            "explored_states": self.explored_states,
            "witness": self.witness.to_document(g) if self.witness is not None else None,
        }


# -- constructive strategies ---------------------------------------------

def naive_pebble(g: Dag) -> Pebbling:
    """Pebble nodes in topological order and never remove anything."""
    steps = [NodeSet()]
    acc = 0
    for v in g.node_list():
        acc |= 1 << (v - 1)
        steps.append(NodeSet.from_mask(acc))
    return Pebbling(tuple(steps), SEQUENTIAL)


def _longest_path_counts(g: Dag, alive: int):
    n = g.n
    din = [0] * (n + 2)
    cin = [0] * (n + 2)
    for v in range(1, n + 1):
        if not (alive >> (v - 1)) & 1:
            continue
        best, cnt = 0, 1
        for u in g.parent_list(v):
            if (alive >> (u - 1)) & 1:
                if din[u] > best:
                    best, cnt = din[u], cin[u]
                elif din[u] == best:
                    cnt += cin[u]
        din[v], cin[v] = best + 1, cnt
    dout = [0] * (n + 2)
    cout = [0] * (n + 2)
    for v in range(n, 0, -1):
        if not (alive >> (v - 1)) & 1:
            continue
        best, cnt = 0, 1
        for w in g.child_list(v):
            if (alive >> (w - 1)) & 1:
                if dout[w] > best:
                    best, cnt = dout[w], cout[w]
                elif dout[w] == best:
                    cnt += cout[w]
        dout[v], cout[v] = best + 1, cnt
    return din, cin, dout, cout


def depth_reduce_set(g: Dag, d: int, method: str = "exact", max_subsets: int = 2_000_000) -> NodeSet:
    """A set S with depth(G - S) <= d.

    ``exact`` returns a minimum-size set (lexicographically first among
    them); ``greedy`` repeatedly deletes the node lying on the most
    longest paths.
    """
    if d < 0:
        raise ValueError("d must be non-negative")
    if g.depth() <= d:
        return NodeSet()
    if method == "greedy":
        alive = g.nodes().mask
        removed = 0
        while True:
            din, cin, dout, cout = _longest_path_counts(g, alive)
            depth = max(din)
            if depth <= d:
                return NodeSet.from_mask(removed)
            best_v, best_c = None, -1
            for v in NodeSet.from_mask(alive):
                if din[v] + dout[v] - 1 == depth and cin[v] * cout[v] > best_c:
                    best_v, best_c = v, cin[v] * cout[v]
            alive &= ~(1 << (best_v - 1))
            removed |= 1 << (best_v - 1)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    ptr, idx, absent = csr_parents(g)
    cand = np.array([v - 1 for v in g.node_list()], dtype=np.int64)
    budget = max_subsets
    for k in range(1, len(cand) + 1):
        cost = math.comb(len(cand), k)
        if cost > budget:
            raise OracleCapError(f"exact depth reduction needs more than {max_subsets} subsets")
        budget -= cost
        best, wit, _ = K.min_depth_removing(ptr, idx, g.n, absent, cand, k, d + 1)
        if best <= d:
            return NodeSet(int(x) + 1 for x in wit)
    return g.nodes()


def reducible_bw_strategy(g: Dag, s, d: int) -> BwPebbling:
    """Black/white pebbling for a graph with depth(G - S) <= d.

    White pebbles go on S one per round in ascending order, then d rounds
    add every node whose parents are all pebbled as a black pebble, then a
    final round clears the graph.
    """
    s = as_nodeset(s)
    if not s <= g.nodes():
        raise PreconditionError("S must be a subset of the graph's nodes")
    depth_left = g.remove(s).depth()
    if depth_left > d:
        raise PreconditionError(f"depth(G - S) = {depth_left} exceeds d = {d}")
    empty = NodeSet()
    steps = [(empty, empty)]
    white = 0
    for v in s:
        white |= 1 << (v - 1)
        steps.append((empty, NodeSet.from_mask(white)))
    black = 0
    nodes = g.node_list()
    for _ in range(d):
        have = black | white
        grow = 0
        for x in nodes:
            if g.parent_mask(x) & ~have == 0:
                grow |= 1 << (x - 1)
        black |= grow
        steps.append((NodeSet.from_mask(black), NodeSet.from_mask(white)))
    steps.append((empty, empty))
    return BwPebbling(tuple(steps))


def reducible_bw_bound(e: int, d: int, n: int) -> int:
    return e * (e + 1) // 2 + d * n


# -- exact oracles -------------------------------------------------------

def _compact(g: Dag) -> tuple[Dag, list[int]]:
    """Relabel a view to 1..size; returns the graph and new->old ids."""
    if not g.is_view:
        return g, list(range(g.n + 1))
    old = g.node_list()
    new_of = {v: i + 1 for i, v in enumerate(old)}
    h = Dag(len(old), [(new_of[u], new_of[v]) for u, v in g.edges])
    return h, [0] + old


def _expand(p: Pebbling, back: list[int]) -> Pebbling:
    return Pebbling(tuple(NodeSet(back[v] for v in c) for c in p.steps), p.mode, p.target)


def _cap(g: Dag, mode: str, limits: OracleLimits | None) -> OracleLimits:
    limits = limits or OracleLimits()
    cap = limits.max_nodes if limits.max_nodes is not None else DEFAULT_CAPS[mode]
    cap = min(cap, HARD_NODE_LIMIT)
    if g.size > cap:
        raise OracleCapError(f"graph has {g.size} nodes; oracle cap for {mode} mode is {cap}")
    return limits


def _run(h: Dag, mode: str, objective: int, s: int, max_states: int):
    par = parent_masks(h)
    sinks = h.sinks().mask
    return K.search(par, h.n, np.int64(sinks), mode == SEQUENTIAL, objective, s, max_states)


def _witness(goal: int, pred: np.ndarray, move: np.ndarray, mode: str) -> Pebbling:
    confs = []
    st = int(goal)
    while st != 0:
        confs.append(NodeSet.from_mask(int(move[st])))
        st = int(pred[st])
    confs.append(NodeSet())
    return Pebbling(tuple(reversed(confs)), mode)


def _check_mode(mode: str) -> str:
    aliases = {"seq": SEQUENTIAL, "par": PARALLEL}
    mode = aliases.get(mode, mode)
    if mode not in (SEQUENTIAL, PARALLEL):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


def brute_force(g: Dag, objective: str, mode: str = PARALLEL, s: int | None = None,
                limits: OracleLimits | None = None) -> OracleResult:
    """Exact optimum of ``objective`` over all legal pebblings of ``g``.

    ``objective`` is one of space, cc, ss (needs threshold ``s`` >= 1) or
    time.  The witness is re-validated and re-measured before returning.
    """
    mode = _check_mode(mode)
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    if objective == "ss" and (s is None or s < 1):
        raise ValueError("the ss objective needs a threshold s >= 1")
    limits = _cap(g, mode, limits)
    h, back = _compact(g)
    thr = s if objective == "ss" else None
    if h.n == 0:
        return OracleResult(objective, mode, 0, Pebbling((NodeSet(),), mode), 0, thr)

    if objective == "space":
        explored = 0
        k = max(1, h.indeg_cap)
        while True:
            status, _, goal, ex, pred, move = _run(h, mode, K.OBJ_SPACE, k, limits.max_states)
            explored += int(ex)
            if status == K.STATUS_CAP:
                return OracleResult(objective, mode, None, None, explored, thr, False, k)
            if status == K.STATUS_OK:
                value = k
                break
            k += 1
    else:
        code = {"cc": K.OBJ_CC, "ss": K.OBJ_SS, "time": K.OBJ_TIME}[objective]
        status, value, goal, ex, pred, move = _run(h, mode, code, s or 0, limits.max_states)
        explored = int(ex)
        if status == K.STATUS_CAP:
            return OracleResult(objective, mode, None, None, explored, thr, False, int(value))
        value = int(value)

    wit = _witness(goal, pred, move, mode)
    require_legal(h, wit, mode)
    rep = metrics(h, wit, check=False)
    achieved = {"space": rep.space, "cc": rep.cc, "time": rep.time,
                "ss": rep.ss(s) if s else None}[objective]
    if achieved != value:
        raise AssertionError(f"witness achieves {achieved}, search reported {value}")
    return OracleResult(objective, mode, value, _expand(wit, back), explored, thr)


def min_space(g: Dag, mode: str = PARALLEL, limits=None) -> int:
    return brute_force(g, "space", mode, limits=limits).value


def min_cc(g: Dag, mode: str = PARALLEL, limits=None) -> int:
    return brute_force(g, "cc", mode, limits=limits).value


def min_ss(g: Dag, s: int, mode: str = PARALLEL, limits=None) -> int:
    return brute_force(g, "ss", mode, s=s, limits=limits).value


def min_time(g: Dag, mode: str = PARALLEL, limits=None) -> int:
    return brute_force(g, "time", mode, limits=limits).value


def hpv_space_bound(g: Dag, limits=None) -> int:
    """Brute-force sequential minimum space, for comparison with n/log2 n."""
    return min_space(g, SEQUENTIAL, limits)


def hpv_reference(n: int) -> float:
    return n / math.log2(n) if n > 1 else 1.0


def brute_force_bw(g: Dag, max_nodes: int = 6) -> OracleResult:
    """Minimum black/white cumulative cost by uniform-cost search.

    Uses the unrestricted successor relation: any subset of black pebbles
    allowed by the placement rule, any subset of removable white pebbles,
    and at most one new white pebble anywhere.
    """
    if g.size > max_nodes:
        raise OracleCapError(f"graph has {g.size} nodes; black/white cap is {max_nodes}")
    h, back = _compact(g)
    n = h.n
    targets = h.sinks().mask
    pm = [0] + [h.parent_mask(v) for v in range(1, n + 1)]
    start = (0, 0, 0)
    dist = {start: 0}
    pred: dict = {}
    heap = [(0, start)]
    explored = 0
    goal = None
    while heap:
        d, st = heapq.heappop(heap)
        if d > dist[st]:
            continue
        b, w, cov = st
        if w == 0 and cov == targets:
            goal = st
            break
        explored += 1
        have = b | w
        ready = 0
        for v in range(1, n + 1):
            if pm[v] & ~have == 0:
                ready |= 1 << (v - 1)
        black_pool = b | ready
        removable = w & ready
        keep_white = w & ~removable
        new_whites = [0] + [1 << v for v in range(n) if not (w >> v) & 1]
        for nb in _submasks(black_pool):
            for rem in _submasks(removable):
                for nw in new_whites:
                    w2 = keep_white | rem | nw
                    conf = nb | w2
                    nxt = (nb, w2, cov | (conf & targets))
                    nd = d + conf.bit_count()
                    if nd < dist.get(nxt, 1 << 60):
                        dist[nxt] = nd
                        pred[nxt] = st
                        heapq.heappush(heap, (nd, nxt))
    if goal is None:
        raise AssertionError("black/white search exhausted without a goal")
    steps = []
    st = goal
    while st != start:
        steps.append((NodeSet(back[v] for v in NodeSet.from_mask(st[0])),
                      NodeSet(back[v] for v in NodeSet.from_mask(st[1]))))
        st = pred[st]
    steps.append((NodeSet(), NodeSet()))
    wit = BwPebbling(tuple(reversed(steps)))
    bad = validate_bw(g, wit)
    if bad is not None:
        raise AssertionError(f"black/white witness illegal: {bad}")
    value = dist[goal]
    return OracleResult("bw_cc", "bw", value, wit, explored)


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def random_parallel_pebbling(g: Dag, rng, keep_prob: float = 0.6, place_prob: float = 0.6,
                             max_steps: int = 10_000) -> Pebbling:
    """A random legal parallel pebbling covering all sinks.

    Each step keeps a random subset of the current pebbles and places a
    random subset of the ready nodes; if that would make no progress the
    lowest ready unpebbled node is forced in.
    """
    nodes = g.node_list()
    targets = g.sinks().mask
    steps = [NodeSet()]
    cur = 0
    covered = 0
    for _ in range(max_steps):
        if covered & targets == targets:
            break
        ready = [v for v in nodes if g.parent_mask(v) & ~cur == 0]
        nxt = 0
        for v in NodeSet.from_mask(cur):
            if rng.random() < keep_prob:
                nxt |= 1 << (v - 1)
        for v in ready:
            if rng.random() < place_prob:
                nxt |= 1 << (v - 1)
        fresh = [v for v in ready if not (cur >> (v - 1)) & 1]
        if nxt & ~cur == 0 and fresh:
            # keep everything so that forced progress cannot be undone
            nxt = cur | (1 << (fresh[0] - 1))
        steps.append(NodeSet.from_mask(nxt))
        covered |= nxt
        cur = nxt
    else:
        raise RuntimeError("random pebbling did not finish")
    return Pebbling(tuple(steps), PARALLEL)


@dataclass(frozen=True)
class LabeledScan:
    """Per-code results of ``scan_cc_against_robustness`` (code = edge bitmask)."""

    n: int
    cc: np.ndarray
    best_ed: np.ndarray
    best_e: np.ndarray

    def dag(self, code: int) -> Dag:
        pairs = [(u, v) for v in range(2, self.n + 1) for u in range(1, v)]
        return Dag(self.n, [p for i, p in enumerate(pairs) if (code >> i) & 1])


def scan_cc_against_robustness(n: int, chunk: int = 1 << 16) -> LabeledScan:
    """Parallel min cc and max over e of e * (exact robust depth) for every labeled DAG on [n].

    Runs the same compiled search as ``brute_force`` without witness
    reconstruction, so it is practical for all 2**C(n,2) graphs at n = 7.
    """
    if not 1 <= n <= 8:
        raise ValueError("labeled scans support 1 <= n <= 8")
    total = 1 << (n * (n - 1) // 2)
    parts = [K.scan_labeled_dags(n, lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    return LabeledScan(n, *(np.concatenate([p[i] for p in parts]) for i in range(3)))
