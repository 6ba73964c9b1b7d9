"""Compiled inner loops: configuration-space search and removal enumeration.

Graphs are passed as ``par``, an int64 array where ``par[v]`` is the parent
bitmask of 0-based node ``v``.  A search state packs the current
configuration on non-sink nodes together with the set of sinks already
covered (sink bits), so states live in [0, 2**n).
"""

import heapq

import numpy as np
from numba import njit

OBJ_SPACE = 0
OBJ_CC = 1
OBJ_SS = 2
OBJ_TIME = 3

STATUS_OK = 0
STATUS_INFEASIBLE = 1
STATUS_CAP = 2


@njit(cache=True)
def popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def frontier(par, n, config):
    out = np.int64(0)
    for v in range(n):
        if par[v] & ~config == 0:
            out |= np.int64(1) << v
    return out


@njit(cache=True)
def _bits_of(mask, buf):
    m = 0
    v = 0
    while mask:
        if mask & 1:
            buf[m] = np.int64(1) << v
            m += 1
        mask >>= 1
        v += 1
    return m


@njit(cache=True)
def _relax(st_from, d, config, cost, sinks, cov, dist, pred, move, heap):
    nxt = (config & ~sinks) | cov | (config & sinks)
    nd = d + cost
    if nd < dist[nxt]:
        dist[nxt] = nd
        pred[nxt] = st_from
        move[nxt] = config
        heapq.heappush(heap, (nd, nxt))


@njit(cache=True)
def _relax_subsets(st, d, base, bits, m, k, sinks, cov, dist, pred, move, heap, idx):
    # every k-subset of bits[:m], each unioned with base, at cost 0
    if k > m or k < 0:
        return
    for j in range(k):
        idx[j] = j
    while True:
        sub = base
        for j in range(k):
            sub |= bits[idx[j]]
        _relax(st, d, sub, 0, sinks, cov, dist, pred, move, heap)
        j = k - 1
        while j >= 0 and idx[j] == m - k + j:
            j -= 1
        if j < 0:
            break
        idx[j] += 1
        for l in range(j + 1, k):
            idx[l] = idx[l - 1] + 1


@njit(cache=True)
def search(par, n, sinks, sequential, objective, s, max_states):
    """Least-cost search over pebbling configurations.

    Returns (status, value, goal_state, explored, pred, move).  For
    OBJ_SPACE the search only decides whether every configuration can stay
    within ``s`` pebbles (value 0 when feasible).  With STATUS_CAP, value is
    a lower bound on the optimum.
    """
    size = np.int64(1) << n
    inf = np.int64(1) << 62
    dist = np.full(size, inf, np.int64)
    pred = np.full(size, -1, np.int64)
    move = np.zeros(size, np.int64)
    done = np.zeros(size, np.bool_)
    nonsink = (size - 1) & ~sinks
    bits = np.empty(n + 1, np.int64)
    idx = np.empty(n + 1, np.int64)
    xs = np.empty(n + 1, np.int64)
    dist[0] = 0
    heap = [(np.int64(0), np.int64(0))]
    explored = 0
    while len(heap) > 0:
        d, st = heapq.heappop(heap)
        if done[st]:
            continue
        if st & sinks == sinks:
            return STATUS_OK, d, st, explored, pred, move
        if max_states >= 0 and explored >= max_states:
            return STATUS_CAP, d, st, explored, pred, move
        done[st] = True
        explored += 1
        cfg = st & nonsink
        cov = st & sinks
        front = frontier(par, n, cfg)
        if not sequential:
            avail = (cfg | front) & ~cov
            ca = popcount(avail)
            if objective == OBJ_CC:
                sub = avail
                while True:
                    _relax(st, d, sub, popcount(sub), sinks, cov, dist, pred, move, heap)
                    if sub == 0:
                        break
                    sub = (sub - 1) & avail
            elif objective == OBJ_SS:
                _relax(st, d, avail, 1 if ca >= s else 0, sinks, cov, dist, pred, move, heap)
                if ca >= s:
                    m = _bits_of(avail, bits)
                    _relax_subsets(st, d, np.int64(0), bits, m, s - 1, sinks, cov,
                                   dist, pred, move, heap, idx)
            elif objective == OBJ_SPACE:
                if ca <= s:
                    _relax(st, d, avail, 0, sinks, cov, dist, pred, move, heap)
                else:
                    m = _bits_of(avail, bits)
                    _relax_subsets(st, d, np.int64(0), bits, m, s, sinks, cov,
                                   dist, pred, move, heap, idx)
            else:
                _relax(st, d, avail, 1, sinks, cov, dist, pred, move, heap)
        else:
            fresh = front & ~cfg & ~cov
            nx = _bits_of(fresh, xs)
            cp = popcount(cfg)
            for t in range(nx):
                xb = xs[t]
                full = cfg | xb
                if objective == OBJ_CC:
                    sub = cfg
                    while True:
                        c = sub | xb
                        _relax(st, d, c, popcount(c), sinks, cov, dist, pred, move, heap)
                        if sub == 0:
                            break
                        sub = (sub - 1) & cfg
                elif objective == OBJ_SS:
                    _relax(st, d, full, 1 if cp + 1 >= s else 0, sinks, cov,
                           dist, pred, move, heap)
                    if cp + 1 >= s and s >= 2:
                        m = _bits_of(cfg, bits)
                        _relax_subsets(st, d, xb, bits, m, s - 2, sinks, cov,
                                       dist, pred, move, heap, idx)
                elif objective == OBJ_SPACE:
                    if cp + 1 <= s:
                        _relax(st, d, full, 0, sinks, cov, dist, pred, move, heap)
                    elif s >= 1:
                        m = _bits_of(cfg, bits)
                        _relax_subsets(st, d, xb, bits, m, s - 1, sinks, cov,
                                       dist, pred, move, heap, idx)
                else:
                    _relax(st, d, full, 1, sinks, cov, dist, pred, move, heap)
    return STATUS_INFEASIBLE, np.int64(-1), np.int64(-1), explored, pred, move


@njit(cache=True)
def depth_excluding(ptr, idx, n, removed):
    """Longest path (in nodes) avoiding ``removed``; CSR parent lists."""
    d = np.zeros(n, np.int64)
    best = 0
    for v in range(n):
        if removed[v]:
            continue
        m = 0
        for k in range(ptr[v], ptr[v + 1]):
            u = idx[k]
            if not removed[u] and d[u] > m:
                m = d[u]
        d[v] = m + 1
        if d[v] > best:
            best = d[v]
    return best


@njit(cache=True)
def min_depth_removing(ptr, idx, n, absent, cand, e, stop_below):
    """Minimum depth over removal sets of exactly ``e`` candidates.

    Subsets are enumerated lexicographically over ``cand``.  When
    ``stop_below`` >= 0 the scan halts at the first set leaving depth below
    it.  Returns (min_depth, witness index array, subsets examined).
    """
    m = cand.shape[0]
    removed = absent.copy()
    comb = np.arange(e)
    best_comb = comb.copy()
    if e > m:
        return np.int64(0), best_comb[:0], 0
    best = np.int64(1) << 62
    count = 0
    while True:
        for j in range(e):
            removed[cand[comb[j]]] = True
        dep = depth_excluding(ptr, idx, n, removed)
        for j in range(e):
            removed[cand[comb[j]]] = False
        count += 1
        if dep < best:
            best = dep
            best_comb[:] = comb
            if stop_below >= 0 and dep < stop_below:
                break
        j = e - 1
        while j >= 0 and comb[j] == m - e + j:
            j -= 1
        if j < 0:
            break
        comb[j] += 1
        for l in range(j + 1, e):
            comb[l] = comb[l - 1] + 1
    out = np.empty(e, np.int64)
    for j in range(e):
        out[j] = cand[best_comb[j]]
    return best, out, count


@njit(cache=True)
def _subgraph_depths(par, n):
    """depths[alive] = longest path (in nodes) inside ``alive``, for every mask."""
    size = np.int64(1) << n
    out = np.zeros(size, np.int64)
    d = np.zeros(n, np.int64)
    for alive in range(size):
        best = 0
        for v in range(n):
            if not (alive >> v) & 1:
                d[v] = 0
                continue
            m = 0
            for u in range(v):
                if (par[v] >> u) & 1 and d[u] > m:
                    m = d[u]
            d[v] = m + 1
            if d[v] > best:
                best = d[v]
        out[alive] = best
    return out


@njit(cache=True)
def scan_labeled_dags(n, lo, hi):
    """Parallel min cc and the strongest exact depth-robustness product per DAG.

    Edge bit i of the code selects the i-th pair (u, v), u < v, ordered by v
    then u.  For each code in [lo, hi) returns the parallel minimum
    cumulative complexity and max over e >= 1 of e * min_{|S|=e} depth(G-S).
    """
    m = hi - lo
    cc = np.zeros(m, np.int64)
    best_ed = np.zeros(m, np.int64)
    best_e = np.zeros(m, np.int64)
    par = np.zeros(n, np.int64)
    size = np.int64(1) << n
    full = size - 1
    for k in range(m):
        code = lo + k
        par[:] = 0
        bit = 0
        for v in range(1, n):
            for u in range(v):
                if (code >> bit) & 1:
                    par[v] |= np.int64(1) << u
                bit += 1
        has_child = np.int64(0)
        for v in range(n):
            has_child |= par[v]
        sinks = full & ~has_child
        res = search(par, n, sinks, False, OBJ_CC, 0, -1)
        cc[k] = res[1]
        depths = _subgraph_depths(par, n)
        mins = np.full(n + 1, n + 1, np.int64)
        for alive in range(size):
            e = n - popcount(alive)
            if depths[alive] < mins[e]:
                mins[e] = depths[alive]
        for e in range(1, n + 1):
            if e * mins[e] > best_ed[k]:
                best_ed[k] = e * mins[e]
                best_e[k] = e
    return cc, best_ed, best_e
