import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.CPTreeIndex import build_index, get
from src.CoreStructures import (VIRTUAL_LEVEL, CLTree, UnionFind, build_cltree, core_decomposition, gkt_direct,
                                k_hat_core, peel_component)
from src.ProfiledGraph import EMPTY_TREE, GPTree, ProfiledGraph
from src.SubtreeAlgebra import enumerate_subtrees, parent_subtrees
from tests.strategies import (PROPERTY_SETTINGS, A, B, C, CM_THEME, D, E, F, IS_THEME, profiled_graphs,
                              random_profiled_graph, random_queries, subtree_pairs)


def to_networkx(g: ProfiledGraph, vertices=None) -> nx.Graph:
    nxg = nx.Graph()
    nxg.add_nodes_from(range(g.n))
    nxg.add_edges_from(g.edges())
    if vertices is not None:
        nxg = nxg.subgraph(vertices)
    return nxg


def reference_khat(g: ProfiledGraph, k, q, vertices=None):
    """Connected k-core of q from networkx."""
    nxg = to_networkx(g, vertices)
    if q not in nxg:
        return frozenset()
    core = nx.k_core(nxg, k)
    if q not in core:
        return frozenset()
    return frozenset(nx.node_connected_component(core, q))


class TestUnionFind:
    def test_union_and_find(self):
        uf = UnionFind(5)
        uf.union(0, 1)
        uf.union(3, 4)
        uf.union(1, 4)
        assert uf.find(0) == uf.find(3)
        assert uf.find(2) != uf.find(0)


class TestCoreDecomposition:
    def test_fixture(self, fixture_graph):
        cores = core_decomposition(fixture_graph)
        assert cores.as_dict() == {A: 3, B: 3, C: 2, D: 3, E: 3, F: 1}
        assert cores.max_core == 3

    def test_induced_subgraph(self, fixture_graph):
        cores = core_decomposition(fixture_graph, [B, C, D])
        assert cores.as_dict() == {B: 2, C: 2, D: 2}
        assert A not in cores

    @PROPERTY_SETTINGS
    @given(profiled_graphs)
    def test_matches_networkx(self, g):
        assert core_decomposition(g).as_dict() == nx.core_number(to_networkx(g))


class TestCLTree:
    def test_fixture_shape(self, fixture_graph):
        tree = build_cltree(fixture_graph)
        assert tree.records() == [(1, -1, (F,)), (2, 0, (C,)), (3, 1, (A, B, D, E))]
        assert tree.vertex_node_map[C].level == 2

    def test_fixture_khat(self, fixture_graph):
        tree = build_cltree(fixture_graph)
        assert k_hat_core(tree, 3, D) == frozenset({A, B, D, E})
        assert k_hat_core(tree, 2, D) == frozenset({A, B, C, D, E})
        assert k_hat_core(tree, 1, D) == frozenset(range(6))
        assert k_hat_core(tree, 3, C) == frozenset()
        assert k_hat_core(tree, 4, D) == frozenset()
        with pytest.raises(ValueError):
            k_hat_core(tree, -1, D)

    def test_disconnected_graph_has_virtual_root(self):
        g = ProfiledGraph.from_edges(5, [(0, 1), (1, 2), (0, 2), (3, 4)], [EMPTY_TREE] * 5, GPTree([-1]))
        tree = build_cltree(g)
        assert tree.root.level == VIRTUAL_LEVEL
        assert tree.root.vertices == []
        assert k_hat_core(tree, 0, 3) == frozenset({3, 4})
        assert k_hat_core(tree, 2, 0) == frozenset({0, 1, 2})

    def test_records_round_trip(self, fixture_graph):
        tree = build_cltree(fixture_graph)
        assert CLTree.from_records(tree.records()) == tree

    def test_every_vertex_once(self):
        g = random_profiled_graph(5)
        tree = build_cltree(g)
        stored = [v for node in tree.nodes for v in node.vertices]
        assert sorted(stored) == list(range(g.n))

    @PROPERTY_SETTINGS
    @given(profiled_graphs)
    def test_khat_matches_networkx(self, g):
        tree = build_cltree(g)
        for q in range(min(g.n, 6)):
            for k in range(5):
                assert k_hat_core(tree, k, q) == reference_khat(g, k, q)

    @PROPERTY_SETTINGS
    @given(profiled_graphs)
    def test_label_subgraph(self, g):
        vertices = [v for v in range(g.n) if len(g.ptrees[v]) > 1]
        tree = build_cltree(g, vertices)
        for q in vertices[:5]:
            for k in range(4):
                assert k_hat_core(tree, k, q) == reference_khat(g, k, q, vertices)


class TestPeeling:
    def test_peel_component(self, fixture_graph):
        assert peel_component(fixture_graph, [B, C, D], 2, D) == frozenset({B, C, D})
        assert peel_component(fixture_graph, [B, C, D, F], 2, D) == frozenset({B, C, D})
        assert peel_component(fixture_graph, [B, C], 2, B) == frozenset()
        assert peel_component(fixture_graph, [B, C, D], 2, A) == frozenset()

    def test_gkt_direct(self, fixture_graph):
        assert gkt_direct(fixture_graph, D, 2, CM_THEME) == frozenset({B, C, D})
        assert gkt_direct(fixture_graph, D, 2, IS_THEME) == frozenset({A, D, E})
        assert gkt_direct(fixture_graph, D, 2, frozenset(range(7))) == frozenset()
        assert gkt_direct(fixture_graph, F, 2, frozenset({0, 6})) == frozenset()
        assert gkt_direct(fixture_graph, D, 0, EMPTY_TREE) == frozenset(range(6))

    @PROPERTY_SETTINGS
    @given(profiled_graphs)
    def test_monotone_in_k(self, g):
        q = 0
        t = g.ptrees[q]
        previous = gkt_direct(g, q, 0, t)
        for k in range(1, 5):
            current = gkt_direct(g, q, k, t)
            assert current <= previous
            previous = current

    @PROPERTY_SETTINGS
    @given(profiled_graphs)
    def test_anti_monotone_in_subtree(self, g):
        q = 0
        t = g.ptrees[q]
        for k in range(4):
            full = gkt_direct(g, q, k, t)
            root_only = gkt_direct(g, q, k, frozenset({0}) & t)
            assert full <= root_only <= gkt_direct(g, q, k, EMPTY_TREE)

    def test_component_of_q_only(self):
        g = ProfiledGraph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], [EMPTY_TREE] * 6,
                                     GPTree([-1]))
        assert peel_component(g, range(6), 2, 4) == frozenset({3, 4, 5})
        assert peel_component(g, range(6), 0, 0) == frozenset({0, 1, 2})


def feasibility_table(g, q, k):
    return {t: gkt_direct(g, q, k, t) for t in enumerate_subtrees(g.ptrees[q], g.gptree)}


class TestSubtreeMonotonicity:
    @PROPERTY_SETTINGS
    @given(profiled_graphs, st.data())
    def test_larger_subtree_smaller_community(self, g, data):
        q = data.draw(st.integers(min_value=0, max_value=g.n - 1))
        k = data.draw(st.integers(min_value=0, max_value=4))
        _, smaller, larger = data.draw(subtree_pairs(g.gptree, g.ptrees[q]))
        assert gkt_direct(g, q, k, larger) <= gkt_direct(g, q, k, smaller)

    @pytest.mark.parametrize("seed", range(0, 100, 4))
    def test_bounded_by_parent_and_new_label_core(self, seed):
        g = random_profiled_graph(seed)
        idx = build_index(g)
        for q in random_queries(g, seed, count=3):
            for k in range(4):
                table = feasibility_table(g, q, k)
                for t, members in table.items():
                    if len(t) < 2:
                        continue
                    for parent in parent_subtrees(t, g.gptree):
                        (label,) = t - parent
                        assert members <= table[parent] & get(idx, k, q, label)

    @pytest.mark.parametrize("seed", range(0, 100, 4))
    def test_infeasible_subtree_prunes_every_supertree(self, seed):
        g = random_profiled_graph(seed)
        for q in random_queries(g, seed, count=3):
            for k in range(4):
                table = feasibility_table(g, q, k)
                infeasible = [s for s, members in table.items() if not members]
                for t, members in table.items():
                    if any(s <= t for s in infeasible):
                        assert not members
