#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# This file is part of ProfiledSearch, which is released under the GNU General Public License (GPL).
# See the LICENSE or COPYING file in the root of this project or visit
# http://www.gnu.org/licenses/gpl-3.0.html for the full text of the license.

"""
ProfiledSearch
=================================================================

k-core decomposition, the CL-tree of nested connected k-cores and the
index-free computation of G_k[T] (the connected k-core of q among the
vertices whose P-tree contains T).

(c) ProfiledSearch, 2024

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU General Public License for more details.

You should have received a copy of the GNU General Public License
along with this program. If not, see <http://www.gnu.org/licenses/>.
"""

__author__ = "Ali Karaoglu"
__version__ = "0.1.0"
__date__ = "2024-06-02"

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from src.ProfiledGraph import ProfiledGraph, PTree

logger = logging.getLogger(__name__)

VIRTUAL_LEVEL = -1
NO_VERTICES = frozenset()


class UnionFind:
    """
    Disjoint sets over 0..n-1 with union by rank and path compression.

    >>> uf = UnionFind(4)
    >>> uf.union(0, 1); uf.union(2, 3)
    >>> uf.find(1) == uf.find(0), uf.find(1) == uf.find(3)
    (True, False)
    """

    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        x, y = self.find(x), self.find(y)
        if x == y:
            return x
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        self.parent[y] = x
        if self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        return x


@dataclass
class CoreDecomposition:
    """Core numbers of a graph or of a vertex-induced subgraph (global vertex ids)."""
    vertices: np.ndarray
    core_number: np.ndarray

    @cached_property
    def _position(self):
        return {int(v): i for i, v in enumerate(self.vertices)}

    def __getitem__(self, v) -> int:
        return int(self.core_number[self._position[int(v)]])

    def __contains__(self, v):
        return int(v) in self._position

    def as_dict(self) -> Dict[int, int]:
        return {int(v): int(c) for v, c in zip(self.vertices, self.core_number)}

    @property
    def max_core(self) -> int:
        return int(self.core_number.max()) if len(self.core_number) else 0


@dataclass(eq=False)
class CLNode:
    level: int
    vertices: List[int] = field(default_factory=list)
    parent: Optional["CLNode"] = None
    children: List["CLNode"] = field(default_factory=list)

    @cached_property
    def members(self) -> frozenset:
        """Vertices of this node and of every descendant."""
        collected = []
        stack = [self]
        while stack:
            node = stack.pop()
            collected.extend(node.vertices)
            stack.extend(node.children)
        return frozenset(collected)

    def sort_key(self):
        return (self.level, min(self.members) if self.members else -1)


class CLTree:
    """
    Nested connected k-cores. Each vertex sits in exactly one node, the node
    of its core number; a node plus its descendants is a connected k-core
    at the node's level. When the graph is disconnected the components hang
    below a virtual root at level -1 that holds no vertex.
    """

    def __init__(self, root: CLNode):
        self.root = root
        self.nodes = []
        self.vertex_node_map: Dict[int, CLNode] = {}
        stack = [root]
        while stack:
            node = stack.pop()
            node.vertices.sort()
            node.children.sort(key=CLNode.sort_key)
            self.nodes.append(node)
            for v in node.vertices:
                self.vertex_node_map[v] = node
            stack.extend(reversed(node.children))

    def __len__(self):
        return len(self.nodes)

    def records(self) -> list:
        """(level, parent position, vertices) per node in preorder; used for comparison and serialization."""
        position = {id(node): i for i, node in enumerate(self.nodes)}
        return [(node.level, position[id(node.parent)] if node.parent is not None else -1, tuple(node.vertices))
                for node in self.nodes]

    @classmethod
    def from_records(cls, records) -> "CLTree":
        nodes = []
        for level, parent, vertices in records:
            node = CLNode(int(level), [int(v) for v in vertices])
            if parent >= 0:
                node.parent = nodes[parent]
                nodes[parent].children.append(node)
            nodes.append(node)
        if not nodes:
            raise ValueError("A CL-tree needs at least a root node")
        return cls(nodes[0])

    def __eq__(self, other):
        if not isinstance(other, CLTree):
            return NotImplemented
        return self.records() == other.records()

    __hash__ = None

    def k_hat_core(self, k: int, q: int) -> frozenset:
        return k_hat_core(self, k, q)


def _local_adjacency(g: ProfiledGraph, vertices=None):
    """Global ids plus local CSR lists of the subgraph induced by vertices (all when None)."""
    if vertices is None:
        idx = np.arange(g.n, dtype=np.int64)
        sub = g.csr
    else:
        idx = np.unique(np.asarray(list(vertices), dtype=np.int64))
        sub = g.csr[idx][:, idx]
    sub.sort_indices()
    return idx, sub.indptr.tolist(), sub.indices.tolist()


def _bucket_peel(indptr, indices) -> list:
    """Core numbers by bucket peeling over local CSR lists."""
    n = len(indptr) - 1
    if n == 0:
        return []
    deg = np.diff(np.asarray(indptr, dtype=np.int64))
    order = np.argsort(deg, kind="stable").tolist()
    counts = np.bincount(deg)
    bins = np.concatenate(([0], np.cumsum(counts)[:-1])).tolist()
    deg = deg.tolist()
    vert = order
    pos = [0] * n
    for i, v in enumerate(vert):
        pos[v] = i
    for i in range(n):
        v = vert[i]
        dv = deg[v]
        for j in range(indptr[v], indptr[v + 1]):
            u = indices[j]
            du = deg[u]
            if du > dv:
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u], pos[w] = pw, pu
                    vert[pu], vert[pw] = w, u
                bins[du] += 1
                deg[u] = du - 1
    return deg


def core_decomposition(g: ProfiledGraph, vertices: Optional[Iterable[int]] = None) -> CoreDecomposition:
    idx, indptr, indices = _local_adjacency(g, vertices)
    core = np.asarray(_bucket_peel(indptr, indices), dtype=np.int64)
    return CoreDecomposition(idx, core)


def build_cltree(g: ProfiledGraph, vertices: Optional[Iterable[int]] = None) -> CLTree:
    """
    CL-tree of g (or of the subgraph induced by vertices).

    Levels are processed from the highest core number down; at each level the
    new vertices are unioned with their already processed neighbors, and the
    component nodes created earlier become children of the node that absorbs them.
    """
    idx, indptr, indices = _local_adjacency(g, vertices)
    n = len(idx)
    core = _bucket_peel(indptr, indices)
    by_level: Dict[int, List[int]] = {}
    for v in range(n):
        by_level.setdefault(core[v], []).append(v)

    uf = UnionFind(n)
    processed = [False] * n
    top: Dict[int, CLNode] = {}
    for k in sorted(by_level, reverse=True):
        batch = by_level[k]
        absorbed = []
        for v in batch:
            for j in range(indptr[v], indptr[v + 1]):
                u = indices[j]
                if processed[u]:
                    absorbed.append((v, top[uf.find(u)]))
        for v in batch:
            processed[v] = True
        for v in batch:
            for j in range(indptr[v], indptr[v + 1]):
                u = indices[j]
                if processed[u]:
                    uf.union(u, v)
        created: Dict[int, CLNode] = {}
        for v in batch:
            r = uf.find(v)
            node = created.get(r)
            if node is None:
                node = created[r] = CLNode(k)
            node.vertices.append(int(idx[v]))
        attached = set()
        for v, child in absorbed:
            if id(child) in attached:
                continue
            attached.add(id(child))
            parent = created[uf.find(v)]
            child.parent = parent
            parent.children.append(child)
        for r, node in created.items():
            top[r] = node

    tops = {id(node): node for node in (top[uf.find(v)] for v in range(n))}
    if len(tops) == 1:
        root = next(iter(tops.values()))
    else:
        root = CLNode(VIRTUAL_LEVEL)
        for node in tops.values():
            node.parent = root
            root.children.append(node)
    tree = CLTree(root)
    logger.debug("CL-tree with %d nodes over %d vertices", len(tree), n)
    return tree


def k_hat_core(t: CLTree, k: int, q: int) -> frozenset:
    """Connected k-core containing q, or the empty set when q's core number is below k."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    node = t.vertex_node_map.get(q)
    if node is None or node.level < k:
        return NO_VERTICES
    while node.parent is not None and node.parent.level >= k:
        node = node.parent
    return node.members


def peel_component(g: ProfiledGraph, candidates: Iterable[int], k: int, q: int) -> frozenset:
    """Peel candidates down to minimum degree k and return the component holding q (empty if q is peeled)."""
    neighbor_sets = g.neighbor_sets
    alive = set(candidates)
    if q not in alive:
        return NO_VERTICES
    degree = {v: len(neighbor_sets[v] & alive) for v in alive}
    queue = deque(v for v, d in degree.items() if d < k)
    removed = set(queue)
    while queue:
        v = queue.popleft()
        if v == q:
            return NO_VERTICES
        alive.discard(v)
        for u in neighbor_sets[v]:
            if u in alive and u not in removed:
                degree[u] -= 1
                if degree[u] < k:
                    removed.add(u)
                    queue.append(u)
    if q in removed:
        return NO_VERTICES
    members = np.fromiter(sorted(alive), dtype=np.int64, count=len(alive))
    _, labels = connected_components(g.csr[members][:, members], directed=False)
    own = labels[int(np.searchsorted(members, q))]
    return frozenset(members[labels == own].tolist())


def gkt_direct(g: ProfiledGraph, q: int, k: int, t: PTree) -> frozenset:
    """G_k[t] computed from the whole graph, without any index."""
    g.check_vertex(q)
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    t = frozenset(t)
    if not t <= g.ptrees[q]:
        return NO_VERTICES
    if t:
        candidates = [v for v in range(g.n) if t <= g.ptrees[v]]
    else:
        candidates = range(g.n)
    return peel_component(g, candidates, k, q)
