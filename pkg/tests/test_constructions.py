import itertools
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dag_strategies import dags
from pebbleforge.constructions import (
    CERTIFIED,
    SC_STACK,
    BaseGraphError,
    build_main,
    build_superconcentrator,
    certified_small_base,
    default_source_count,
    disjoint_paths,
    make_base,
    overlay,
    superconcentrator_stack_base,
    to_indegree_two,
    verify_superconcentrator,
)
from pebbleforge.generators import binary_tree, complete_dag, diamond, path_dag
from pebbleforge.graph import Dag
from pebbleforge.pebbling import PARALLEL, validate
from pebbleforge.strategies import min_space, min_ss, random_parallel_pebbling


def nx_disjoint_paths(g, a, b):
    """Vertex-disjoint path count via networkx node connectivity on a super source/sink."""
    h = nx.DiGraph()
    h.add_nodes_from(range(1, g.n + 1))
    h.add_edges_from(g.edges)
    h.add_edges_from(("s", v) for v in a)
    h.add_edges_from((v, "t") for v in b)
    return nx.algorithms.connectivity.local_node_connectivity(h, "s", "t")


def all_pairs_ok(g, ins, outs):
    for k in range(1, len(ins) + 1):
        for a in itertools.combinations(ins, k):
            for b in itertools.combinations(outs, k):
                if nx_disjoint_paths(g, a, b) < k:
                    return False
    return True


class TestDisjointPaths:
    def test_cut_vertex(self):
        g = Dag(5, [(1, 3), (2, 3), (3, 4), (3, 5)])
        assert disjoint_paths(g, [1, 2], [4, 5]) == 1
        bad = verify_superconcentrator(g, [1, 2], [4, 5], 2)
        assert bad is not None and bad[2] == 1

    def test_shared_endpoint(self):
        assert disjoint_paths(diamond(), [1], [4]) == 1
        assert disjoint_paths(path_dag(3), [1, 2, 3], [1, 2, 3]) == 3

    @settings(max_examples=100, deadline=None)
    @given(dags(min_n=2, max_n=9), st.integers(0, 10_000))
    def test_matches_networkx(self, g, seed):
        rng = random.Random(seed)
        a = rng.sample(range(1, g.n + 1), rng.randint(1, g.n))
        b = rng.sample(range(1, g.n + 1), rng.randint(1, g.n))
        if set(a) & set(b):
            return
        assert disjoint_paths(g, a, b) == nx_disjoint_paths(g, a, b)


class TestSuperconcentrator:
    @pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
    def test_full_check_against_networkx(self, m):
        sc = build_superconcentrator(m, seed=m)
        assert sc.certificate["ok"]
        assert all_pairs_ok(sc.dag, list(sc.inputs), list(sc.outputs))

    def test_eight_sampled(self):
        sc = build_superconcentrator(8, seed=1, k_exhaustive=2, samples=60)
        assert sc.certificate["ok"] and sc.certificate["sampled_pairs"] == 60
        rng = random.Random(5)
        for _ in range(40):
            k = rng.randint(1, 8)
            a = rng.sample(list(sc.inputs), k)
            b = rng.sample(list(sc.outputs), k)
            assert nx_disjoint_paths(sc.dag, a, b) == k

    def test_layout(self):
        sc = build_superconcentrator(4)
        assert sc.inputs == set(range(1, 5))
        assert sc.outputs == set(range(sc.dag.n - 3, sc.dag.n + 1))
        assert sc.dag.sources() == sc.inputs

    def test_deterministic(self):
        assert build_superconcentrator(6, 4).dag.to_json() == build_superconcentrator(6, 4).dag.to_json()

    def test_errors(self):
        with pytest.raises(ValueError):
            build_superconcentrator(0)
        with pytest.raises(ValueError):
            verify_superconcentrator(path_dag(3), [1], [2, 3], 1)
        with pytest.raises(ValueError):
            verify_superconcentrator(build_superconcentrator(8).dag, range(1, 9),
                                     range(21, 29), 8, max_checks=100)


@settings(max_examples=60, deadline=None)
@given(dags(max_n=8))
def test_indegree_two_keeps_reachability(g):
    h, ids = to_indegree_two(g)
    assert h.indeg_cap <= 2
    for u in g.node_list():
        for v in g.node_list():
            if u < v:
                reach_g = u in g.ancestors({v})
                reach_h = ids[u] in h.ancestors({ids[v]})
                assert reach_g == reach_h


class TestBases:
    def test_make_base_checks(self):
        with pytest.raises(BaseGraphError):
            make_base(complete_dag(4))
        with pytest.raises(BaseGraphError):
            make_base(path_dag(3).remove({2}))
        b = make_base(binary_tree(2))
        assert b.source_set == {1, 2, 3, 4}

    def test_certified_small_exhaustive(self):
        b = certified_small_base(6)
        assert b.provenance["method"] == "exhaustive"
        assert len(b.source_set) == default_source_count(6) == 2
        assert min_space(b.dag, PARALLEL) == b.provenance["min_space_parallel"] == 3
        assert b.dag.indeg_cap <= 2

    def test_certified_range(self):
        with pytest.raises(BaseGraphError):
            certified_small_base(13)

    def test_stack(self):
        b = superconcentrator_stack_base(3, 2)
        assert b.dag.indeg_cap <= 2 and len(b.source_set) == 3
        assert b.provenance["kind"] == SC_STACK


class TestOverlay:
    def test_sizes_and_identification(self):
        base = make_base(binary_tree(2))
        r = overlay(base, 0.5, seed=1)
        m = len(base.source_set)
        j = 2 * m * r.delta
        assert r.dag.n == j + base.dag.n - m
        for i, s in enumerate(sorted(base.source_set), start=1):
            assert r.overlay_map[s] == 2 * i * r.delta == r.base_ids[s]
        for u, v in base.dag.edges:
            assert r.base_ids[u] in r.dag.parents(r.base_ids[v])

    def test_deterministic(self):
        a = build_main(6, 0.5, seed=2)
        b = build_main(6, 0.5, seed=2)
        assert a.dag.to_json() == b.dag.to_json()
        assert a.dag.recipe["base"]["kind"] == CERTIFIED

    def test_external_base(self):
        r = build_main(0, 0.5, base_kind="external", external=diamond())
        assert r.base.dag == diamond()
        with pytest.raises(BaseGraphError):
            build_main(6, 0.5, base_kind="external")
        with pytest.raises(BaseGraphError):
            build_main(6, 0.5, base_kind="weird")

    def test_stack_kind(self):
        r = build_main(40, 0.5, base_kind=SC_STACK)
        assert r.base.provenance["kind"] == SC_STACK

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000))
    def test_restriction_of_legal_pebbling_is_legal(self, seed):
        r = overlay(make_base(diamond()), 0.5, seed=seed % 5)
        p = random_parallel_pebbling(r.dag, random.Random(seed))
        q = r.restrict_to_base(p)
        assert validate(diamond(), q) is None

    def test_sustained_space_not_below_base(self):
        base = make_base(diamond())
        r = overlay(base, 0.5)
        for s in range(1, 4):
            assert min_ss(r.dag, s, PARALLEL) >= min_ss(base.dag, s, PARALLEL)
