#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# This file is part of ProfiledSearch, which is released under the GNU General Public License (GPL).
# See the LICENSE or COPYING file in the root of this project or visit
# http://www.gnu.org/licenses/gpl-3.0.html for the full text of the license.

"""
ProfiledSearch
=================================================================

The CP-tree index: one node per label in the shape of the GP-tree, each
holding the CL-tree of the subgraph induced by the vertices carrying that
label, plus the head map from every vertex to the nodes of its P-tree
leaves. Also the `.cpt` binary format.

(c) ProfiledSearch, 2024
"""

__author__ = "Ali Karaoglu"
__version__ = "0.1.0"
__date__ = "2024-06-02"

import hashlib
import logging
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from src.CoreStructures import CLTree, build_cltree, k_hat_core, NO_VERTICES
from src.ProfiledGraph import GPTree, ProfiledGraph, PTree
from src.SubtreeAlgebra import leaves

logger = logging.getLogger(__name__)

FORMAT_MAGIC = b"CPTI"
FORMAT_VERSION = 1
DIGEST_SIZE = 32
FLAG_COMPRESSED = 0x01
FLAG_NAMES = 0x02
section_tags = [b"GPTR", b"GRPH", b"GCLT", b"NODE", b"HEAD"]


class IndexFormatError(ValueError):
    pass


@dataclass(eq=False)
class CPTreeNode:
    label: int
    vertex_set: tuple
    cltree: CLTree
    parent: Optional["CPTreeNode"] = None
    children: List["CPTreeNode"] = field(default_factory=list)
    # label of the child whose CL-tree this node reuses after compression
    shared_with: Optional[int] = None


class CPTreeIndex:
    """
    CP-tree index over a profiled graph.

    nodes maps label -> CPTreeNode for every label carried by at least one
    vertex; head_map[v] lists the nodes of the leaves of T(v). The whole-graph
    CL-tree answers the unconstrained case. The graph itself is kept so that
    a deserialized index can serve queries alone.
    """

    def __init__(self, graph: ProfiledGraph, nodes: Dict[int, CPTreeNode], head_map, graph_cltree: CLTree,
                 compressed=False):
        self.graph = graph
        self.nodes = nodes
        self.head_map = tuple(tuple(h) for h in head_map)
        self.graph_cltree = graph_cltree
        self.compressed = compressed
        self.build_seconds = 0.0

    @property
    def gptree(self) -> GPTree:
        return self.graph.gptree

    def get(self, k: int, q: int, label: int) -> frozenset:
        return get(self, k, q, label)

    def restore_ptree(self, q: int) -> PTree:
        return restore_ptree(self, q)

    def entry_count(self) -> int:
        return entry_count(self)

    def __eq__(self, other):
        if not isinstance(other, CPTreeIndex):
            return NotImplemented
        return (self.graph == other.graph and self.graph_cltree == other.graph_cltree
                and self._signature() == other._signature())

    __hash__ = None

    def _signature(self):
        nodes = []
        for label in sorted(self.nodes):
            node = self.nodes[label]
            nodes.append((label, node.vertex_set, node.parent.label if node.parent else -1,
                          tuple(c.label for c in node.children), node.shared_with, node.cltree.records()))
        heads = tuple(tuple(node.label for node in h) for h in self.head_map)
        return nodes, heads, self.compressed


def build_index(g: ProfiledGraph, compress=False) -> CPTreeIndex:
    gp = g.gptree
    start = time.perf_counter()
    members: List[List[int]] = [[] for _ in range(len(gp))]
    for v, t in enumerate(g.ptrees):
        for x in t:
            members[x].append(v)

    nodes: Dict[int, CPTreeNode] = {}
    for x in gp.order:
        if not members[x]:
            continue
        node = CPTreeNode(x, tuple(members[x]), build_cltree(g, members[x]))
        if x != gp.root:
            parent = nodes[gp.parent[x]]
            node.parent = parent
            parent.children.append(node)
        nodes[x] = node

    head_map = [[nodes[x] for x in leaves(t, gp)] for t in g.ptrees]
    idx = CPTreeIndex(g, nodes, head_map, build_cltree(g))
    if compress:
        compress_index(idx)
    idx.build_seconds = time.perf_counter() - start
    logger.info("Built CP-tree index: %d nodes, %d entries, %.3f s",
                len(nodes), idx.entry_count(), idx.build_seconds)
    return idx


def compress_index(idx: CPTreeIndex) -> int:
    """
    Let every node whose vertex set is as large as one of its children's reuse
    that child's CL-tree. Child vertex sets are subsets of the parent's, so
    equal size means equal induced subgraph. Returns the number of shared trees.
    """
    shared = 0
    for x in reversed(idx.gptree.order):
        node = idx.nodes.get(x)
        if node is None or node.shared_with is not None:
            continue
        for child in node.children:
            if len(child.vertex_set) == len(node.vertex_set):
                node.cltree = child.cltree
                node.shared_with = child.label
                shared += 1
                break
    idx.compressed = True
    logger.info("Compression shares %d of %d CL-trees", shared, len(idx.nodes))
    return shared


def get(idx: CPTreeIndex, k: int, q: int, label: int) -> frozenset:
    """Connected k-core containing q inside the subgraph of vertices carrying label."""
    node = idx.nodes.get(label)
    if node is None:
        return NO_VERTICES
    return k_hat_core(node.cltree, k, q)


def restore_ptree(idx: CPTreeIndex, q: int) -> PTree:
    idx.graph.check_vertex(q)
    labels = set()
    for node in idx.head_map[q]:
        while node is not None and node.label not in labels:
            labels.add(node.label)
            node = node.parent
    return frozenset(labels)


def entry_count(idx: CPTreeIndex) -> int:
    return sum(len(node.vertex_set) for node in idx.nodes.values())


# ---------------------------------------------------------------------------
# Binary format: header, length-prefixed sections, trailing digest
# ---------------------------------------------------------------------------

def _ints(values) -> bytes:
    arr = np.asarray(values, dtype="<i4").ravel()
    return struct.pack("<I", len(arr)) + arr.tobytes()


def _strings(values) -> bytes:
    chunks = [struct.pack("<I", len(values))]
    for s in values:
        raw = s.encode("utf-8")
        chunks.append(struct.pack("<I", len(raw)) + raw)
    return b"".join(chunks)


def _section(tag: bytes, payload: bytes) -> bytes:
    return tag + struct.pack("<Q", len(payload)) + payload


def _encode_cltree(tree: CLTree) -> bytes:
    records = tree.records()
    offsets = np.zeros(len(records) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(r[2]) for r in records])
    return b"".join([
        _ints([r[0] for r in records]),
        _ints([r[1] for r in records]),
        _ints(offsets),
        _ints([v for r in records for v in r[2]]),
    ])


def serialize(idx: CPTreeIndex) -> bytes:
    g = idx.graph
    gp = g.gptree
    flags = (FLAG_COMPRESSED if idx.compressed else 0) | (FLAG_NAMES if g.vertex_names is not None else 0)
    header = FORMAT_MAGIC + struct.pack("<BBH", FORMAT_VERSION, flags, 0)

    gptree = _ints(gp.parent) + _strings(gp.names)
    csr = g.csr
    graph = struct.pack("<I", g.n) + _ints(csr.indptr) + _ints(csr.indices)
    if g.vertex_names is not None:
        graph += _strings(g.vertex_names)

    node_chunks = [struct.pack("<I", len(idx.nodes))]
    for x in gp.order:
        node = idx.nodes.get(x)
        if node is None:
            continue
        shared = -1 if node.shared_with is None else node.shared_with
        node_chunks.append(struct.pack("<ii", x, shared) + _ints(node.vertex_set))
        if shared == -1:
            node_chunks.append(_encode_cltree(node.cltree))

    heads = [struct.pack("<I", len(idx.head_map))]
    heads.extend(_ints([node.label for node in h]) for h in idx.head_map)

    body = header + b"".join([
        _section(b"GPTR", gptree),
        _section(b"GRPH", graph),
        _section(b"GCLT", _encode_cltree(idx.graph_cltree)),
        _section(b"NODE", b"".join(node_chunks)),
        _section(b"HEAD", b"".join(heads)),
    ])
    return body + hashlib.blake2b(body, digest_size=DIGEST_SIZE).digest()


class _Reader:
    def __init__(self, data, name="index"):
        self.data = memoryview(data)
        self.offset = 0
        self.name = name

    def take(self, size) -> memoryview:
        if size < 0 or self.offset + size > len(self.data):
            raise IndexFormatError(f"{self.name}: stream is truncated")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def ints(self) -> np.ndarray:
        (count,) = self.unpack("<I")
        return np.frombuffer(self.take(4 * count), dtype="<i4").astype(np.int64)

    def strings(self) -> list:
        (count,) = self.unpack("<I")
        values = []
        for _ in range(count):
            (size,) = self.unpack("<I")
            values.append(bytes(self.take(size)).decode("utf-8"))
        return values

    def section(self, expected: bytes) -> "_Reader":
        tag = bytes(self.take(4))
        if tag != expected:
            raise IndexFormatError(f"{self.name}: expected section {expected!r}, found {tag!r}")
        (size,) = self.unpack("<Q")
        return _Reader(self.take(size), f"{self.name}/{expected.decode()}")

    def done(self):
        if self.offset != len(self.data):
            raise IndexFormatError(f"{self.name}: {len(self.data) - self.offset} trailing bytes")


def _decode_cltree(reader: _Reader) -> CLTree:
    levels = reader.ints()
    parents = reader.ints()
    offsets = reader.ints()
    vertices = reader.ints().tolist()
    if not (len(levels) == len(parents) == len(offsets) - 1) or (len(offsets) and offsets[-1] != len(vertices)):
        raise IndexFormatError(f"{reader.name}: inconsistent CL-tree arrays")
    records = [(int(levels[i]), int(parents[i]), vertices[offsets[i]:offsets[i + 1]]) for i in range(len(levels))]
    try:
        return CLTree.from_records(records)
    except (ValueError, IndexError) as e:
        raise IndexFormatError(f"{reader.name}: malformed CL-tree ({e})") from None


def deserialize(data: bytes) -> CPTreeIndex:
    header_size = len(FORMAT_MAGIC) + 4
    if len(data) < header_size + DIGEST_SIZE:
        raise IndexFormatError("index: stream is truncated")
    if bytes(data[:4]) != FORMAT_MAGIC:
        raise IndexFormatError("index: not a CP-tree index file")
    version, flags, _ = struct.unpack("<BBH", data[4:header_size])
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"index: format version {version} is not supported (expected {FORMAT_VERSION})")
    body, digest = data[:-DIGEST_SIZE], data[-DIGEST_SIZE:]
    if hashlib.blake2b(body, digest_size=DIGEST_SIZE).digest() != bytes(digest):
        raise IndexFormatError("index: checksum mismatch (file truncated or corrupted)")

    reader = _Reader(body[header_size:])
    sec = reader.section(b"GPTR")
    parents = sec.ints().tolist()
    names = sec.strings()
    sec.done()
    try:
        gp = GPTree(parents, names)
    except ValueError as e:
        raise IndexFormatError(f"index: bad GP-tree ({e})") from None

    sec = reader.section(b"GRPH")
    (n,) = sec.unpack("<I")
    indptr = sec.ints()
    indices = sec.ints().tolist()
    vertex_names = sec.strings() if flags & FLAG_NAMES else None
    sec.done()
    if len(indptr) != n + 1:
        raise IndexFormatError("index: adjacency does not match the vertex count")
    adjacency = [indices[indptr[v]:indptr[v + 1]] for v in range(n)]

    sec = reader.section(b"GCLT")
    graph_cltree = _decode_cltree(sec)
    sec.done()

    sec = reader.section(b"NODE")
    (count,) = sec.unpack("<I")
    nodes: Dict[int, CPTreeNode] = {}
    pending_shares = []
    for _ in range(count):
        label, shared = sec.unpack("<ii")
        if not gp.is_label(label) or label in nodes:
            raise IndexFormatError(f"index: bad node label {label}")
        vertex_set = tuple(sec.ints().tolist())
        cltree = _decode_cltree(sec) if shared == -1 else None
        node = CPTreeNode(label, vertex_set, cltree)
        if label != gp.root:
            parent = nodes.get(gp.parent[label])
            if parent is None:
                raise IndexFormatError(f"index: node {label} precedes its parent")
            node.parent = parent
            parent.children.append(node)
        if shared != -1:
            node.shared_with = shared
            pending_shares.append(node)
        nodes[label] = node
    sec.done()
    for node in reversed(pending_shares):
        source = nodes.get(node.shared_with)
        if source is None or source.cltree is None:
            raise IndexFormatError(f"index: node {node.label} shares a missing CL-tree")
        node.cltree = source.cltree

    sec = reader.section(b"HEAD")
    (count,) = sec.unpack("<I")
    if count != n:
        raise IndexFormatError("index: head map does not match the vertex count")
    try:
        head_map = [[nodes[x] for x in sec.ints().tolist()] for _ in range(count)]
    except KeyError as e:
        raise IndexFormatError(f"index: head map names unknown node {e}") from None
    sec.done()
    reader.done()

    ptrees = []
    for heads in head_map:
        labels = set()
        for node in heads:
            labels.update(gp.root_path(node.label))
        ptrees.append(labels)
    graph = ProfiledGraph(adjacency, ptrees, gp, vertex_names)
    return CPTreeIndex(graph, nodes, head_map, graph_cltree, compressed=bool(flags & FLAG_COMPRESSED))


def save_index(idx: CPTreeIndex, path):
    Path(path).write_bytes(serialize(idx))


def load_index(path) -> CPTreeIndex:
    return deserialize(Path(path).read_bytes())
