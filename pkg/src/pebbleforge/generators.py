"""Standard graph families, random DAGs and exhaustive DAG enumeration."""

from __future__ import annotations

import itertools
import random
from typing import Iterator

from .graph import Dag


def path_dag(n: int) -> Dag:
    return Dag(n, [(v, v + 1) for v in range(1, n)])


def complete_dag(n: int) -> Dag:
    return Dag(n, [(u, v) for v in range(1, n + 1) for u in range(1, v)])


def empty_dag(n: int) -> Dag:
    return Dag(n, [])


def diamond() -> Dag:
    return Dag(4, [(1, 2), (1, 3), (2, 4), (3, 4)])


def binary_tree(height: int) -> Dag:
    """In-tree with 2**height leaves numbered first and the root last."""
    leaves = 1 << height
    level = list(range(1, leaves + 1))
    nxt = leaves + 1
    edges = []
    while len(level) > 1:
        up = []
        for a, b in zip(level[::2], level[1::2]):
            edges += [(a, nxt), (b, nxt)]
            up.append(nxt)
            nxt += 1
        level = up
    return Dag(nxt - 1, edges)


def random_dag(n: int, rng: random.Random, *, edge_prob: float | None = None,
               max_indeg: int | None = None) -> Dag:
    """Random topologically numbered DAG.

    Each pair u < v is an edge with probability ``edge_prob`` (default drawn
    uniformly from [0.1, 0.7]); ``max_indeg`` keeps a random subset of parents.
    """
    p = rng.uniform(0.1, 0.7) if edge_prob is None else edge_prob
    edges = []
    for v in range(2, n + 1):
        parents = [u for u in range(1, v) if rng.random() < p]
        if max_indeg is not None and len(parents) > max_indeg:
            parents = sorted(rng.sample(parents, max_indeg))
        edges += [(u, v) for u in parents]
    return Dag(n, edges)


def all_pairs(n: int) -> list[tuple[int, int]]:
    return [(u, v) for v in range(2, n + 1) for u in range(1, v)]


def all_dags(n: int) -> Iterator[Dag]:
    """Every labeled DAG on [n] whose edges respect the numbering (2**C(n,2))."""
    pairs = all_pairs(n)
    for bits in range(1 << len(pairs)):
        yield Dag(n, [pairs[i] for i in range(len(pairs)) if (bits >> i) & 1])


def _canonical_key(n: int, edges: list[tuple[int, int]]) -> tuple:
    best = None
    for perm in itertools.permutations(range(1, n + 1)):
        relabel = sorted((perm[u - 1], perm[v - 1]) for u, v in edges)
        key = tuple(relabel)
        if best is None or key < best:
            best = key
    return best


def nonisomorphic_dags(n: int) -> list[Dag]:
    """One topologically numbered representative per isomorphism class.

    Brute-force canonical forms over all n! relabelings; intended for n <= 5.
    Representatives are the first labeled DAG encountered in ``all_dags``.
    """
    seen = {}
    for g in all_dags(n):
        key = _canonical_key(n, list(g.edges))
        if key not in seen:
            seen[key] = g
    return list(seen.values())
