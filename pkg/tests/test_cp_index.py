import struct

import numpy as np
import pytest

from src.CPTreeIndex import (DIGEST_SIZE, FORMAT_MAGIC, IndexFormatError, build_index, compress_index,
                             deserialize, entry_count, get, load_index, restore_ptree, save_index, serialize)
from src.CoreStructures import gkt_direct
from src.ProfiledGraph import generate_graph
from src.SubtreeAlgebra import root_path
from tests.strategies import A, B, C, D, E, F, random_profiled_graph


@pytest.fixture(scope="module")
def synthetic_graph():
    return generate_graph(300, 1200, 24, 4, 8, 60, seed=3)


class TestBuild:
    def test_fixture_nodes(self, fixture_index):
        assert sorted(fixture_index.nodes) == list(range(7))
        assert fixture_index.nodes[1].vertex_set == (B, C, D)
        assert fixture_index.nodes[6].vertex_set == (A, D, E, F)
        assert fixture_index.nodes[4].parent is fixture_index.nodes[0]

    def test_entry_count(self, fixture_graph, fixture_index):
        assert entry_count(fixture_index) == sum(len(t) for t in fixture_graph.ptrees) == 25

    def test_head_map(self, fixture_index):
        assert [node.label for node in fixture_index.head_map[D]] == [2, 3, 5, 6]
        assert [node.label for node in fixture_index.head_map[F]] == [6]

    def test_restore_ptree(self, fixture_graph, fixture_index):
        for v in range(fixture_graph.n):
            assert restore_ptree(fixture_index, v) == fixture_graph.ptrees[v]

    def test_get(self, fixture_index):
        assert get(fixture_index, 2, D, 1) == frozenset({B, C, D})
        assert get(fixture_index, 2, D, 5) == frozenset({A, D, E})
        assert get(fixture_index, 3, D, 1) == frozenset()
        assert get(fixture_index, 2, C, 4) == frozenset()

    def test_get_is_root_path_verification(self, synthetic_graph):
        idx = build_index(synthetic_graph)
        rng = np.random.default_rng(0)
        for _ in range(200):
            q = int(rng.integers(synthetic_graph.n))
            labels = sorted(synthetic_graph.ptrees[q])
            if not labels:
                continue
            label = labels[int(rng.integers(len(labels)))]
            k = int(rng.integers(0, 6))
            path = root_path(label, synthetic_graph.gptree)
            assert get(idx, k, q, label) == gkt_direct(synthetic_graph, q, k, path)

    def test_child_members_inside_parent(self, fixture_index, synthetic_graph):
        for idx in (fixture_index, build_index(synthetic_graph)):
            for node in idx.nodes.values():
                for child in node.children:
                    assert set(child.vertex_set) <= set(node.vertex_set)

    def test_label_without_vertices(self):
        g = random_profiled_graph(21)
        idx = build_index(g)
        carried = set().union(*g.ptrees)
        for label in range(len(g.gptree)):
            if label not in carried:
                assert label not in idx.nodes
                assert get(idx, 0, 0, label) == frozenset()


class TestCompression:
    def test_same_answers(self, synthetic_graph):
        plain = build_index(synthetic_graph)
        packed = build_index(synthetic_graph, compress=True)
        assert packed.compressed
        rng = np.random.default_rng(1)
        for _ in range(300):
            q = int(rng.integers(synthetic_graph.n))
            label = int(rng.integers(len(synthetic_graph.gptree)))
            k = int(rng.integers(0, 6))
            assert get(packed, k, q, label) == get(plain, k, q, label)

    def test_shares_equal_subgraphs(self, fixture_graph):
        idx = build_index(fixture_graph)
        shared = compress_index(idx)
        # CM, ML and AI are carried by the same three vertices
        assert idx.nodes[1].shared_with in (2, 3)
        assert shared >= 1


class TestSerialization:
    def test_round_trip_get(self, synthetic_graph):
        idx = build_index(synthetic_graph)
        loaded = deserialize(serialize(idx))
        assert loaded == idx
        assert loaded.graph == synthetic_graph
        rng = np.random.default_rng(2)
        for _ in range(1000):
            q = int(rng.integers(synthetic_graph.n))
            label = int(rng.integers(len(synthetic_graph.gptree)))
            k = int(rng.integers(0, 8))
            assert get(loaded, k, q, label) == get(idx, k, q, label)

    def test_compressed_round_trip(self, synthetic_graph):
        idx = build_index(synthetic_graph, compress=True)
        loaded = deserialize(serialize(idx))
        assert loaded.compressed
        assert loaded == idx
        for node in loaded.nodes.values():
            if node.shared_with is not None:
                assert node.cltree is loaded.nodes[node.shared_with].cltree

    def test_rebuild_is_byte_identical(self, synthetic_graph):
        assert serialize(build_index(synthetic_graph)) == serialize(build_index(synthetic_graph))

    def test_names_survive(self, fixture_index, tmp_path):
        path = tmp_path / "fixture.cpt"
        save_index(fixture_index, path)
        loaded = load_index(path)
        assert loaded.graph.vertex_names == ("A", "B", "C", "D", "E", "F")
        assert loaded.graph == fixture_index.graph

    @pytest.mark.parametrize("cut", [0, 5, 40, -1, -DIGEST_SIZE - 3])
    def test_truncation(self, fixture_index, cut):
        data = serialize(fixture_index)
        with pytest.raises(IndexFormatError):
            deserialize(data[:cut])

    def test_corruption(self, fixture_index):
        data = bytearray(serialize(fixture_index))
        data[20] ^= 0xFF
        with pytest.raises(IndexFormatError, match="checksum"):
            deserialize(bytes(data))

    def test_bad_magic(self, fixture_index):
        data = serialize(fixture_index)
        with pytest.raises(IndexFormatError, match="not a CP-tree"):
            deserialize(b"XXXX" + data[4:])

    def test_version_mismatch(self, fixture_index):
        data = bytearray(serialize(fixture_index))
        data[len(FORMAT_MAGIC)] = 99
        with pytest.raises(IndexFormatError, match="version 99"):
            deserialize(bytes(data))

    def test_header_layout(self, fixture_index):
        data = serialize(fixture_index)
        assert data[:4] == FORMAT_MAGIC
        version, flags, _ = struct.unpack("<BBH", data[4:8])
        assert version == 1
        assert flags == 0x02
        assert data[8:12] == b"GPTR"
