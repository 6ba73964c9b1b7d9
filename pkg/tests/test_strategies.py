import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference as ref
from dag_strategies import dags
from pebbleforge.generators import binary_tree, complete_dag, diamond, empty_dag, path_dag
from pebbleforge.graph import NodeSet
from pebbleforge.pebbling import PARALLEL, SEQUENTIAL, metrics, validate, validate_bw
from pebbleforge.strategies import (
    OracleCapError,
    OracleLimits,
    PreconditionError,
    brute_force,
    brute_force_bw,
    depth_reduce_set,
    hpv_reference,
    hpv_space_bound,
    min_cc,
    min_space,
    min_ss,
    min_time,
    naive_pebble,
    reducible_bw_bound,
    reducible_bw_strategy,
    scan_cc_against_robustness,
)


class TestNaive:
    def test_path(self):
        p = naive_pebble(path_dag(3))
        assert [c.to_list() for c in p.steps] == [[], [1], [1, 2], [1, 2, 3]]
        assert metrics(path_dag(3), p).cc == 6

    def test_complete(self):
        assert metrics(complete_dag(4), naive_pebble(complete_dag(4))).cc == 10

    @settings(max_examples=100, deadline=None)
    @given(dags(max_n=12))
    def test_always_legal_sequential(self, g):
        p = naive_pebble(g)
        assert p.mode == SEQUENTIAL and validate(g, p) is None
        rep = metrics(g, p)
        assert rep.time == g.n and rep.space == g.n


class TestDepthReduce:
    def test_path_needs_one_node(self):
        for n in range(2, 13):
            s = depth_reduce_set(path_dag(n), math.ceil(n / 2))
            assert len(s) == 1 and path_dag(n).remove(s).depth() <= math.ceil(n / 2)

    def test_nothing_when_depth_already_small(self):
        assert depth_reduce_set(diamond(), 3) == set()

    def test_complete_dag(self):
        for n in range(1, 8):
            for k in range(0, n + 1):
                assert len(depth_reduce_set(complete_dag(n), k)) == n - k

    @settings(max_examples=60, deadline=None)
    @given(dags(max_n=8), st.integers(0, 8))
    def test_exact_is_minimum_and_greedy_is_valid(self, g, d):
        exact = depth_reduce_set(g, d, "exact")
        greedy = depth_reduce_set(g, d, "greedy")
        assert g.remove(exact).depth() <= d
        assert g.remove(greedy).depth() <= d
        assert len(exact) <= len(greedy)
        if len(exact) > 0:
            smaller = len(exact) - 1
            assert ref.min_depth_after_removal(g, smaller) > d


class TestReducibleBw:
    def test_path_example(self):
        g = path_dag(4)
        p = reducible_bw_strategy(g, {2}, 2)
        assert validate_bw(g, p) is None
        assert metrics(g, p).bw_cc <= 1 + 2 * 4

    def test_no_white_pebbles_means_parallel_black(self):
        g = binary_tree(2)
        p = reducible_bw_strategy(g, set(), g.depth())
        assert validate_bw(g, p) is None
        assert all(not w for _, w in p.steps)

    def test_all_nodes_white(self):
        g = complete_dag(5)
        p = reducible_bw_strategy(g, g.nodes(), 0)
        assert validate_bw(g, p) is None
        assert metrics(g, p).bw_cc <= reducible_bw_bound(5, 0, 5)

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            reducible_bw_strategy(path_dag(5), {3}, 1)

    @settings(max_examples=100, deadline=None)
    @given(dags(max_n=10), st.integers(0, 10_000))
    def test_bound_and_white_phase(self, g, seed):
        rng = random.Random(seed)
        s = NodeSet(v for v in g.node_list() if rng.random() < 0.3)
        d = g.remove(s).depth()
        p = reducible_bw_strategy(g, s, d)
        assert validate_bw(g, p) is None
        e = len(s)
        sizes = p.sizes()
        assert sum(sizes[:e]) == e * (e + 1) // 2
        assert sum(sizes[e:]) <= d * g.n
        assert metrics(g, p).bw_cc <= reducible_bw_bound(e, d, g.n)


class TestOracleValues:
    """Values frozen from the unpruned reference search."""

    def test_path_space(self):
        r = brute_force(path_dag(3), "space", SEQUENTIAL)
        assert r.value == 1
        assert validate(path_dag(3), r.witness) is None
        for n in range(2, 10):
            assert hpv_space_bound(path_dag(n)) == 1

    def test_complete_space(self):
        for n in range(2, 8):
            assert min_space(complete_dag(n), SEQUENTIAL) == n - 1
            assert min_space(complete_dag(n), PARALLEL) == n - 1

    def test_binary_tree_space(self):
        assert hpv_space_bound(binary_tree(2)) == 3

    def test_complete_cc(self):
        expected = {2: 2, 3: 4, 4: 7, 5: 11}
        for n, v in expected.items():
            assert min_cc(complete_dag(n), PARALLEL) == v
            assert min_cc(complete_dag(n), SEQUENTIAL) == v

    def test_diamond(self):
        assert min_cc(diamond(), PARALLEL) == 4
        assert min_cc(diamond(), SEQUENTIAL) == 6
        assert min_space(diamond(), SEQUENTIAL) == 2

    def test_ss_zero_above_space(self):
        g = binary_tree(2)
        assert min_ss(g, min_space(g) + 1) == 0

    def test_time(self):
        assert min_time(path_dag(4), PARALLEL) == 4
        assert min_time(empty_dag(5), PARALLEL) == 1
        assert min_time(empty_dag(5), SEQUENTIAL) == 5

    def test_empty_graph(self):
        assert min_cc(empty_dag(0)) == 0

    def test_hpv_reference(self):
        assert hpv_reference(8) == 8 / 3

    def test_views_are_compacted(self):
        g = complete_dag(6).remove({2, 4})
        r = brute_force(g, "cc", PARALLEL)
        assert r.value == min_cc(complete_dag(4))
        assert validate(g, r.witness) is None

    def test_witness_reproduces_value(self):
        g = binary_tree(2)
        for objective, s in (("space", None), ("cc", None), ("ss", 2), ("time", None)):
            for mode in (SEQUENTIAL, PARALLEL):
                r = brute_force(g, objective, mode, s=s)
                rep = metrics(g, r.witness)
                got = {"space": rep.space, "cc": rep.cc, "time": rep.time,
                       "ss": rep.ss(2)}[objective]
                assert got == r.value and r.exact


class TestOracleLimits:
    def test_node_cap(self):
        with pytest.raises(OracleCapError):
            min_cc(complete_dag(13), PARALLEL)
        with pytest.raises(OracleCapError):
            min_cc(complete_dag(30), PARALLEL, OracleLimits(max_nodes=40))

    def test_state_cap_gives_lower_bound(self):
        r = brute_force(complete_dag(8), "cc", PARALLEL, limits=OracleLimits(max_states=3))
        assert not r.exact and r.value is None
        assert r.lower_bound <= min_cc(complete_dag(8))

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            brute_force(path_dag(2), "ss", PARALLEL)
        with pytest.raises(ValueError):
            brute_force(path_dag(2), "width", PARALLEL)
        with pytest.raises(ValueError):
            brute_force(path_dag(2), "cc", "diagonal")


class TestBlackWhiteOracle:
    def test_path(self):
        r = brute_force_bw(path_dag(3))
        assert validate_bw(path_dag(3), r.witness) is None
        assert metrics(path_dag(3), r.witness).bw_cc == r.value

    def test_not_above_black_only(self):
        for g in (path_dag(4), diamond(), complete_dag(4)):
            assert brute_force_bw(g).value <= min_cc(g, PARALLEL)


@settings(max_examples=60, deadline=None)
@given(dags(max_n=5), st.sampled_from(["space", "cc", "ss", "time"]), st.booleans(), st.integers(1, 4))
def test_oracle_matches_reference_search(g, objective, sequential, s):
    mode = SEQUENTIAL if sequential else PARALLEL
    value = brute_force(g, objective, mode, s=s if objective == "ss" else None).value
    assert value == ref.optimum(g, objective, sequential, s)


@settings(max_examples=60, deadline=None)
@given(dags(max_n=9))
def test_oracle_orderings(g):
    assert min_cc(g, PARALLEL) <= min_cc(g, SEQUENTIAL)
    t = min_time(g, PARALLEL)
    prev = None
    for s in range(1, g.n + 2):
        v = min_ss(g, s, PARALLEL)
        assert v <= t
        if prev is not None:
            assert v <= prev
        prev = v


def test_labeled_scan_matches_single_graph_oracle():
    scan = scan_cc_against_robustness(4)
    assert len(scan.cc) == 64
    for code in range(64):
        g = scan.dag(code)
        assert scan.cc[code] == min_cc(g, PARALLEL)
        best = max(e * ref.min_depth_after_removal(g, e) for e in range(1, 5))
        assert scan.best_ed[code] == best
