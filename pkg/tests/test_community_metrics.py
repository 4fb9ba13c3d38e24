import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.CommunityMetrics import (MetricReport, community_cps, cpf, cps, evaluate, f1, f1_score, ldr, read_truth,
                                  tree_edit_distance)
from src.PCSQueryAbstract import Community, ResultSet
from src.PCSQueryAdvanced import query_advanced
from src.ProfiledGraph import EMPTY_TREE, GPTree, ProfiledGraph
from src.SubtreeAlgebra import maximal_common_subtree
from tests.strategies import (PROPERTY_SETTINGS, A, B, C, CM_THEME, D, E, IS_THEME, gptrees, random_profiled_graph,
                              subtree_pairs, subtrees_of)


@pytest.fixture(scope="module")
def fixture_result(fixture_index):
    return query_advanced(fixture_index, D, 2)


def random_result(g, seed) -> ResultSet:
    rng = np.random.default_rng(seed)
    communities = []
    for _ in range(int(rng.integers(1, 4))):
        size = int(rng.integers(1, g.n + 1))
        members = tuple(sorted(int(v) for v in rng.choice(g.n, size=size, replace=False)))
        communities.append(Community(members, maximal_common_subtree([g.ptrees[v] for v in members])))
    return ResultSet(communities)


class TestTreeEditDistance:
    @PROPERTY_SETTINGS
    @given(gptrees.flatmap(lambda gp: st.tuples(subtrees_of(gp), subtrees_of(gp), subtrees_of(gp))))
    def test_metric_axioms(self, trees):
        a, b, c = trees
        assert tree_edit_distance(a, a) == 0
        assert tree_edit_distance(a, b) == tree_edit_distance(b, a)
        assert (tree_edit_distance(a, b) == 0) == (a == b)
        assert tree_edit_distance(a, c) <= tree_edit_distance(a, b) + tree_edit_distance(b, c)

    @PROPERTY_SETTINGS
    @given(subtree_pairs())
    def test_nested_trees_differ_by_size(self, pair):
        _, s, t = pair
        assert tree_edit_distance(s, t) == len(t) - len(s)


class TestCPS:
    def test_identical_members(self):
        assert community_cps([CM_THEME] * 4) == 1.0
        assert community_cps([CM_THEME]) == 1.0

    def test_pair(self):
        # TED 6 over a union of 7 nodes, counted for both orders, over 2**2
        assert community_cps([CM_THEME, IS_THEME | {6}]) == pytest.approx(1 - 2 * (6 / 7) / 4)

    def test_fixture(self, fixture_graph, fixture_result):
        breakdown = []
        value = cps(fixture_result, fixture_graph, breakdown)
        members = [[fixture_graph.ptrees[v] for v in c.vertices] for c in fixture_result]
        expected = []
        for trees in members:
            total = sum(len(a ^ b) / len(a | b) for a, b in itertools.permutations(trees, 2))
            expected.append(1 - total / len(trees) ** 2)
        assert breakdown == pytest.approx(expected)
        assert value == pytest.approx(np.mean(expected))

    def test_empty_result(self, fixture_graph):
        with pytest.raises(ValueError):
            cps(ResultSet(), fixture_graph)

    @pytest.mark.parametrize("seed", range(50))
    def test_in_unit_interval(self, seed):
        g = random_profiled_graph(seed)
        for offset in range(20):
            result = random_result(g, seed * 100 + offset)
            assert 0.0 <= cps(result, g) <= 1.0

    @pytest.mark.parametrize("seed", range(10))
    def test_relabeling_keeps_value(self, seed):
        g = random_profiled_graph(seed)
        perm = np.random.default_rng(seed).permutation(g.n)
        edges = [(int(perm[u]), int(perm[v])) for u in range(g.n) for v in g.adjacency[u] if u < v]
        ptrees = [None] * g.n
        for v in range(g.n):
            ptrees[perm[v]] = g.ptrees[v]
        relabeled = ProfiledGraph.from_edges(g.n, edges, ptrees, g.gptree)
        result = random_result(g, seed)
        moved = ResultSet([Community(tuple(sorted(int(perm[v]) for v in c.vertices)), c.mct) for c in result])
        assert cps(moved, relabeled) == pytest.approx(cps(result, g))


class TestCPF:
    def test_fixture(self, fixture_graph, fixture_result):
        breakdown = []
        value = cpf(D, fixture_result, fixture_graph, breakdown)
        # {B, C, D} carries r, CM, ML, AI fully, IS and DMS and HW only on D
        first = (4 * 1.0 + 3 * (1 / 3)) / 7
        # {A, D, E} carries r, IS, DMS, HW fully, CM, ML and AI only on D
        second = (4 * 1.0 + 3 * (1 / 3)) / 7
        assert breakdown == pytest.approx([first, second])
        assert value == pytest.approx((first + second) / 2)

    def test_community_order_keeps_value(self, fixture_graph, fixture_result):
        reordered = ResultSet(list(reversed(fixture_result.communities)))
        assert cpf(D, reordered, fixture_graph) == pytest.approx(cpf(D, fixture_result, fixture_graph))

    def test_empty_profile(self):
        g = ProfiledGraph.from_edges(2, [(0, 1)], [EMPTY_TREE, {0}], GPTree([-1]))
        with pytest.raises(ValueError):
            cpf(0, ResultSet([Community((0, 1), EMPTY_TREE)]), g)

    @pytest.mark.parametrize("seed", range(50))
    def test_in_unit_interval(self, seed):
        g = random_profiled_graph(seed)
        for offset in range(20):
            result = random_result(g, seed * 100 + offset)
            q = result.communities[0].vertices[0]
            if g.ptrees[q]:
                assert 0.0 <= cpf(q, result, g) <= 1.0


class TestLDR:
    def test_self_is_one(self, fixture_graph, fixture_result):
        breakdown = {}
        assert ldr(D, fixture_result, fixture_result, fixture_graph, breakdown) == 1.0
        assert breakdown == {1: 1.0, 2: 1.0, 3: 1.0}

    def test_shallower_result(self, fixture_graph, fixture_result):
        other = ResultSet([Community((A, B, D, E), frozenset({0}))])
        breakdown = {}
        value = ldr(D, other, fixture_result, fixture_graph, breakdown)
        # ours: level 1 twice, level 2 three times, level 3 three times
        assert breakdown == {1: 0.5, 2: 0.0, 3: 0.0}
        assert value == pytest.approx(0.5 / 3)

    def test_no_covered_level(self, fixture_graph):
        empty_theme = ResultSet([Community((A, B, C, D, E), frozenset())])
        with pytest.raises(ValueError):
            ldr(D, empty_theme, empty_theme, fixture_graph)


class TestF1:
    def test_perfect_match(self):
        assert f1([{1, 2, 3}], [{1, 2, 3}]) == 1.0

    def test_disjoint(self):
        assert f1([{1, 2}], [{3, 4}]) == 0.0

    def test_partial(self):
        # precision 1, recall 1/2
        assert f1_score(frozenset({1, 2}), frozenset({1, 2, 3, 4})) == pytest.approx(2 / 3)

    def test_best_match_and_both_directions(self):
        breakdown = {}
        value = f1([{1, 2, 3}, {7, 8}], [{1, 2, 3}, {9}], breakdown)
        assert value == pytest.approx(0.5)
        assert breakdown["found_to_truth"] == [1.0, 0.0]
        assert breakdown["truth_to_found"] == [1.0, 0.0]

    def test_accepts_result_sets(self, fixture_result):
        assert f1(fixture_result, [{B, C, D}, {A, D, E}]) == 1.0

    def test_empty_truth(self):
        with pytest.raises(ValueError):
            f1([{1}], [])


class TestReport:
    def test_evaluate_fixture(self, fixture_graph, fixture_result):
        report = evaluate(fixture_graph, D, fixture_result, truth=[frozenset({B, C, D})])
        assert report.ldr == 1.0
        # {B, C, D} matches exactly, {A, D, E} shares only D
        assert report.f1 == pytest.approx((1 + 1 / 3) / 2)
        assert report.f1_reverse == 1.0
        assert len(report.cps_per_community) == 2
        text = report.to_text()
        assert "ldr=1.000000" in text
        assert "f1_reverse=1.000000" in text

    def test_empty_result_report(self, fixture_graph):
        report = evaluate(fixture_graph, D, ResultSet())
        assert report.cps is None and report.ldr is None
        assert report.to_text() == ""
        assert isinstance(report, MetricReport)

    def test_read_truth(self):
        circles = read_truth(["# circles", "1 2 3", "", "4 5"])
        assert circles == [frozenset({1, 2, 3}), frozenset({4, 5})]

    def test_read_truth_names_the_line(self):
        with pytest.raises(ValueError, match="line 3"):
            read_truth(["1 2", "", "3 x"], source="circles.txt")
