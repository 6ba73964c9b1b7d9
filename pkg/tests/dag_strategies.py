"""Hypothesis strategies for small topologically numbered DAGs."""

from hypothesis import strategies as st

from pebbleforge.graph import Dag


@st.composite
def dags(draw, min_n: int = 1, max_n: int = 8, max_indeg: int | None = None):
    n = draw(st.integers(min_n, max_n))
    edges = []
    for v in range(2, n + 1):
        parents = draw(st.sets(st.integers(1, v - 1), max_size=v - 1 if max_indeg is None else min(v - 1, max_indeg)))
        edges += [(u, v) for u in sorted(parents)]
    return Dag(n, edges)


@st.composite
def dag_and_subset(draw, min_n: int = 1, max_n: int = 8):
    g = draw(dags(min_n, max_n))
    s = draw(st.sets(st.integers(1, g.n), max_size=g.n))
    return g, s
