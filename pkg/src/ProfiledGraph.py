#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# This file is part of ProfiledSearch, which is released under the GNU General Public License (GPL).
# See the LICENSE or COPYING file in the root of this project or visit
# http://www.gnu.org/licenses/gpl-3.0.html for the full text of the license.

"""
ProfiledSearch
=================================================================

Data model of profiled graphs: the global label taxonomy (GP-tree), the
per-vertex label trees (P-trees) and the undirected graph carrying them.
Also holds the text formats, the synthetic data generators and the
bundled six-vertex fixture.

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

import hashlib
import logging
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

ROOT_LABEL = 0
ROOT_NAME = "r"

# A P-tree is the node set of an induced rooted subtree of the GP-tree.
PTree = frozenset
EMPTY_TREE: PTree = frozenset()

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "data" / "fixture"
fixture_files = {
    "edges": FIXTURE_DIR / "edges.txt",
    "ptrees": FIXTURE_DIR / "ptrees.txt",
    "gptree": FIXTURE_DIR / "gptree.txt",
    "names": FIXTURE_DIR / "names.txt",
}


class GraphFormatError(ValueError):
    """Raised for unreadable or inconsistent graph input. Carries the source and line number."""

    def __init__(self, message, source="<input>", lineno=None):
        self.source = source
        self.lineno = lineno
        where = f"{source}, line {lineno}" if lineno is not None else str(source)
        super().__init__(f"{where}: {message}")


class GPTree:
    """
    The global taxonomy every P-tree lives in.

    Label ids are dense, 0 is the root. Children are kept in ascending id
    order, and the depth-first preorder over that order is the canonical
    order used for enumeration and tie-breaking.
    """

    def __init__(self, parents: Sequence[int], names: Optional[Sequence[str]] = None, source="<gptree>"):
        size = len(parents)
        if size == 0:
            raise GraphFormatError("GP-tree has no nodes", source)
        roots = [x for x, p in enumerate(parents) if p == -1]
        if len(roots) != 1:
            raise GraphFormatError(f"GP-tree must have exactly one root, found {len(roots)}", source)
        if roots[0] != ROOT_LABEL:
            raise GraphFormatError(f"GP-tree root must have id {ROOT_LABEL}, found {roots[0]}", source)

        children = [[] for _ in range(size)]
        for x, p in enumerate(parents):
            if p == -1:
                continue
            if not 0 <= p < size or p == x:
                raise GraphFormatError(f"label {x} has invalid parent {p}", source)
            children[p].append(x)

        preorder = []
        stack = [ROOT_LABEL]
        depth = [0] * size
        depth[ROOT_LABEL] = 1
        while stack:
            x = stack.pop()
            preorder.append(x)
            for c in reversed(children[x]):
                depth[c] = depth[x] + 1
                stack.append(c)
        if len(preorder) != size:
            unreachable = sorted(set(range(size)) - set(preorder))
            raise GraphFormatError(f"GP-tree contains a cycle through labels {unreachable[:5]}", source)

        self.parent = tuple(int(p) for p in parents)
        self.children = tuple(tuple(c) for c in children)
        self.depth = tuple(depth)
        self.order = tuple(preorder)
        rank = [0] * size
        for i, x in enumerate(preorder):
            rank[x] = i
        self.rank = tuple(rank)
        if names is None:
            names = [ROOT_NAME] + [f"L{x}" for x in range(1, size)]
        self.names = tuple(str(s) for s in names)
        self._by_name = {s: x for x, s in enumerate(self.names)}

    def __len__(self):
        return len(self.parent)

    def __eq__(self, other):
        if not isinstance(other, GPTree):
            return NotImplemented
        return self.parent == other.parent and self.names == other.names

    def __hash__(self):
        return hash((self.parent, self.names))

    @property
    def root(self):
        return ROOT_LABEL

    @cached_property
    def max_depth(self):
        return max(self.depth)

    def is_label(self, x) -> bool:
        return isinstance(x, (int, np.integer)) and 0 <= x < len(self.parent)

    def label_of(self, name: str) -> int:
        if name not in self._by_name:
            raise ValueError(f"Unknown label name {name!r}")
        return self._by_name[name]

    def root_path(self, x: int) -> tuple:
        """Labels from the root down to x."""
        path = []
        while x != -1:
            path.append(x)
            x = self.parent[x]
        return tuple(reversed(path))

    def path_name(self, x: int) -> str:
        return "/".join(self.names[y] for y in self.root_path(x))


class ProfiledGraph:
    """
    Undirected simple graph whose vertices carry P-trees.

    adjacency holds sorted neighbor tuples, ptrees one frozenset of label ids
    per vertex. Instances are treated as immutable once built.
    """

    def __init__(self, adjacency: Sequence[Sequence[int]], ptrees: Sequence[Iterable[int]], gptree: GPTree,
                 vertex_names: Optional[Sequence[str]] = None):
        if len(adjacency) != len(ptrees):
            raise ValueError(f"adjacency has {len(adjacency)} vertices but {len(ptrees)} P-trees were given")
        self.adjacency = tuple(tuple(sorted(set(int(u) for u in nbrs))) for nbrs in adjacency)
        self.ptrees = tuple(frozenset(int(x) for x in t) for t in ptrees)
        self.gptree = gptree
        self.vertex_names = tuple(vertex_names) if vertex_names is not None else None
        self._name_index = None
        self.validate()

    @classmethod
    def from_edges(cls, n, edges, ptrees, gptree, vertex_names=None):
        """Build from an (m, 2) edge array; duplicates and reversed pairs collapse."""
        return cls.from_csr(edges_to_csr(n, edges), ptrees, gptree, vertex_names)

    @classmethod
    def from_csr(cls, csr, ptrees, gptree, vertex_names=None):
        csr = sp.csr_matrix(csr)
        csr.sort_indices()
        indptr, indices = csr.indptr, csr.indices
        adjacency = [indices[indptr[v]:indptr[v + 1]].tolist() for v in range(csr.shape[0])]
        return cls(adjacency, ptrees, gptree, vertex_names)

    @property
    def n(self):
        return len(self.adjacency)

    @cached_property
    def m(self):
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    @cached_property
    def neighbor_sets(self):
        return tuple(frozenset(nbrs) for nbrs in self.adjacency)

    @cached_property
    def csr(self) -> sp.csr_matrix:
        degrees = np.fromiter((len(nbrs) for nbrs in self.adjacency), dtype=np.int64, count=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.fromiter((u for nbrs in self.adjacency for u in nbrs), dtype=np.int64, count=int(indptr[-1]))
        data = np.ones(len(indices), dtype=np.int8)
        return sp.csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def check_vertex(self, v):
        if not isinstance(v, (int, np.integer)) or not 0 <= v < self.n:
            raise ValueError(f"Vertex {v!r} is outside the range 0..{self.n - 1}")

    def degree(self, v) -> int:
        self.check_vertex(v)
        return len(self.adjacency[v])

    def edges(self) -> Iterator[tuple]:
        for v, nbrs in enumerate(self.adjacency):
            for u in nbrs:
                if v < u:
                    yield v, u

    def validate(self):
        for v, nbrs in enumerate(self.adjacency):
            for u in nbrs:
                if u == v:
                    raise ValueError(f"Self-loop at vertex {v}")
                if not 0 <= u < self.n:
                    raise ValueError(f"Vertex {v} has dangling neighbor {u}")
        if (abs(self.csr - self.csr.T)).nnz:
            raise ValueError("Adjacency is not symmetric")
        parent = self.gptree.parent
        for v, t in enumerate(self.ptrees):
            for x in t:
                if not self.gptree.is_label(x):
                    raise ValueError(f"Vertex {v} carries unknown label {x}")
                if x != ROOT_LABEL and parent[x] not in t:
                    raise ValueError(f"P-tree of vertex {v} is not closed: label {x} misses parent {parent[x]}")

    def vertex_name(self, v) -> str:
        if self.vertex_names is None:
            return str(v)
        return self.vertex_names[v]

    def vertex_id(self, token) -> int:
        """Resolve a vertex given by id or by name."""
        if isinstance(token, (int, np.integer)):
            self.check_vertex(token)
            return int(token)
        token = str(token).strip()
        if self.vertex_names is not None:
            if self._name_index is None:
                self._name_index = {s: v for v, s in enumerate(self.vertex_names)}
            if token in self._name_index:
                return self._name_index[token]
        if token.lstrip("-").isdigit():
            v = int(token)
            self.check_vertex(v)
            return v
        raise ValueError(f"Unknown vertex {token!r}")

    def __eq__(self, other):
        if not isinstance(other, ProfiledGraph):
            return NotImplemented
        return (self.adjacency == other.adjacency and self.ptrees == other.ptrees
                and self.gptree == other.gptree)

    __hash__ = None


def edges_to_csr(n, edges) -> sp.csr_matrix:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges) and (edges.min() < 0 or edges.max() >= n):
        raise ValueError(f"Edge endpoint outside the range 0..{n - 1}")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise ValueError("Self-loops are not allowed")
    pairs = np.unique(np.sort(edges, axis=1), axis=0)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    data = np.ones(len(rows), dtype=np.int8)
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def degree(g: ProfiledGraph, v) -> int:
    return g.degree(v)


def close_under_parents(nodes: Iterable[int], gp: GPTree) -> PTree:
    """Smallest superset of nodes that contains the parent of every non-root member."""
    closed = set()
    for x in nodes:
        if not gp.is_label(x):
            raise ValueError(f"Label {x!r} is not part of the GP-tree")
        while x != -1 and x not in closed:
            closed.add(x)
            x = gp.parent[x]
    return frozenset(closed)


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

def _content_lines(lines, source) -> Iterator[tuple]:
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def _parse_int(field, source, lineno, what):
    try:
        value = int(field)
    except ValueError:
        raise GraphFormatError(f"{what} {field!r} is not an integer", source, lineno) from None
    return value


def read_edges(lines, source="<edges>") -> list:
    """Parse `u v` lines into (u, v, lineno) triples; self-loops are rejected."""
    edges = []
    for lineno, line in _content_lines(lines, source):
        fields = line.split()
        if len(fields) != 2:
            raise GraphFormatError(f"expected 'u v', got {line!r}", source, lineno)
        u = _parse_int(fields[0], source, lineno, "vertex id")
        v = _parse_int(fields[1], source, lineno, "vertex id")
        if u < 0 or v < 0:
            raise GraphFormatError("vertex ids must be non-negative", source, lineno)
        if u == v:
            raise GraphFormatError(f"self-loop on vertex {u}", source, lineno)
        edges.append((u, v, lineno))
    return edges


def read_gptree(lines, source="<gptree>") -> GPTree:
    entries = {}
    for lineno, line in _content_lines(lines, source):
        fields = line.split(maxsplit=2)
        if len(fields) < 2:
            raise GraphFormatError(f"expected 'id parent_id name', got {line!r}", source, lineno)
        x = _parse_int(fields[0], source, lineno, "label id")
        p = _parse_int(fields[1], source, lineno, "parent id")
        if x in entries:
            raise GraphFormatError(f"label {x} defined twice", source, lineno)
        name = fields[2].strip() if len(fields) == 3 else (ROOT_NAME if p == -1 else f"L{x}")
        entries[x] = (p, name)
    if sorted(entries) != list(range(len(entries))):
        raise GraphFormatError("label ids must be dense 0..n-1", source)
    parents = [entries[x][0] for x in range(len(entries))]
    names = [entries[x][1] for x in range(len(entries))]
    return GPTree(parents, names, source=source)


def read_ptrees(lines, gp: GPTree, source="<ptrees>") -> dict:
    """Parse `v: id,id,...` lines into {vertex: closed P-tree}."""
    ptrees = {}
    for lineno, line in _content_lines(lines, source):
        head, sep, tail = line.partition(":")
        if not sep:
            raise GraphFormatError(f"expected 'v: id,id,...', got {line!r}", source, lineno)
        v = _parse_int(head.strip(), source, lineno, "vertex id")
        if v < 0:
            raise GraphFormatError("vertex ids must be non-negative", source, lineno)
        if v in ptrees:
            raise GraphFormatError(f"vertex {v} listed twice", source, lineno)
        labels = []
        for field in tail.replace(",", " ").split():
            x = _parse_int(field, source, lineno, "label id")
            if not gp.is_label(x):
                raise GraphFormatError(f"vertex {v} carries label {x} which is not in the GP-tree", source, lineno)
            labels.append(x)
        ptrees[v] = close_under_parents(labels, gp)
    return ptrees


def read_names(lines, source="<names>") -> dict:
    names = {}
    for lineno, line in _content_lines(lines, source):
        fields = line.split(maxsplit=1)
        if len(fields) != 2:
            raise GraphFormatError(f"expected 'id name', got {line!r}", source, lineno)
        names[_parse_int(fields[0], source, lineno, "vertex id")] = fields[1].strip()
    return names


def parse_graph(edge_lines, ptree_lines, gptree_lines, name_lines=None, sources=None) -> ProfiledGraph:
    sources = sources or {}
    gp = read_gptree(gptree_lines, sources.get("gptree", "<gptree>"))
    ptree_map = read_ptrees(ptree_lines, gp, sources.get("ptrees", "<ptrees>"))
    n = max(ptree_map) + 1 if ptree_map else 0
    edge_source = sources.get("edges", "<edges>")
    edges = read_edges(edge_lines, edge_source)
    for u, v, lineno in edges:
        if u >= n or v >= n:
            raise GraphFormatError(f"edge ({u}, {v}) references a vertex without a P-tree line (n={n})",
                                   edge_source, lineno)
    ptrees = [ptree_map.get(v, EMPTY_TREE) for v in range(n)]
    names = None
    if name_lines is not None:
        name_map = read_names(name_lines, sources.get("names", "<names>"))
        names = [name_map.get(v, str(v)) for v in range(n)]
    pairs = np.array([(u, v) for u, v, _ in edges], dtype=np.int64).reshape(-1, 2)
    g = ProfiledGraph.from_edges(n, pairs, ptrees, gp, names)
    logger.debug("Parsed graph with n=%d, m=%d, |GP|=%d", g.n, g.m, len(gp))
    return g


def load_graph(edge_path, ptree_path, gptree_path, names_path=None) -> ProfiledGraph:
    paths = {"edges": Path(edge_path), "ptrees": Path(ptree_path), "gptree": Path(gptree_path)}
    if names_path is not None:
        paths["names"] = Path(names_path)
    texts = {key: path.read_text(encoding="utf-8").splitlines() for key, path in paths.items()}
    return parse_graph(texts["edges"], texts["ptrees"], texts["gptree"], texts.get("names"),
                       sources={key: str(path) for key, path in paths.items()})


def write_graph(g: ProfiledGraph, edge_path, ptree_path, gptree_path, names_path=None):
    with open(edge_path, "w", encoding="utf-8") as f:
        f.write(f"# n={g.n} m={g.m}\n")
        for u, v in g.edges():
            f.write(f"{u} {v}\n")
    with open(ptree_path, "w", encoding="utf-8") as f:
        for v, t in enumerate(g.ptrees):
            f.write(f"{v}: {','.join(str(x) for x in sorted(t))}\n")
    with open(gptree_path, "w", encoding="utf-8") as f:
        for x in range(len(g.gptree)):
            f.write(f"{x} {g.gptree.parent[x]} {g.gptree.names[x]}\n")
    if names_path is not None and g.vertex_names is not None:
        with open(names_path, "w", encoding="utf-8") as f:
            for v in range(g.n):
                f.write(f"{v} {g.vertex_names[v]}\n")


def load_fixture() -> ProfiledGraph:
    """The six-vertex example graph shipped under data/fixture (vertices A..F)."""
    return load_graph(fixture_files["edges"], fixture_files["ptrees"], fixture_files["gptree"],
                      fixture_files["names"])


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------

def token_label(token: str, seed: int, size: int) -> int:
    digest = hashlib.blake2b(f"{seed}\x1f{token}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % size


def synthesize_ptrees(adjacency, gp: GPTree, tokens: Sequence[Sequence[str]], seed: int,
                      vertex_names=None) -> ProfiledGraph:
    """
    Hash every token of a vertex to a GP-tree label and close the result under parents.

    Args:
        adjacency: neighbor lists of the graph (or a ProfiledGraph, whose P-trees are replaced).
        gp: the taxonomy labels are drawn from.
        tokens: per-vertex token lists, aligned with adjacency.
        seed: salts the digest, so identical tokens map identically within one seed.
    """
    if isinstance(adjacency, ProfiledGraph):
        vertex_names = vertex_names if vertex_names is not None else adjacency.vertex_names
        adjacency = adjacency.adjacency
    if len(tokens) != len(adjacency):
        raise ValueError(f"Expected {len(adjacency)} token lists, got {len(tokens)}")
    size = len(gp)
    memo = {}
    ptrees = []
    for words in tokens:
        labels = []
        for word in words:
            if word not in memo:
                memo[word] = token_label(word, seed, size)
            labels.append(memo[word])
        ptrees.append(close_under_parents(labels, gp))
    return ProfiledGraph(adjacency, ptrees, gp, vertex_names)


def generate_gptree(size: int, max_depth: int, seed: int) -> GPTree:
    """Random taxonomy with a bounded depth; parents always have smaller ids than children."""
    if size < 1:
        raise ValueError("GP-tree size must be at least 1")
    if max_depth < 1 or (max_depth == 1 and size > 1):
        raise ValueError(f"Depth {max_depth} cannot hold {size} labels")
    rng = np.random.default_rng(seed)
    parents = [-1]
    depth = [1]
    eligible = [ROOT_LABEL] if max_depth > 1 else []
    for x in range(1, size):
        p = eligible[int(rng.integers(len(eligible)))]
        parents.append(p)
        depth.append(depth[p] + 1)
        if depth[x] < max_depth:
            eligible.append(x)
    return GPTree(parents)


def generate_tokens(n: int, per_vertex: int, vocabulary: int, seed: int) -> list:
    """Per-vertex token lists drawn from a Zipf-like vocabulary so that popular words are shared."""
    rng = np.random.default_rng(seed)
    weights = 1.0 / np.arange(1, vocabulary + 1) ** 1.1
    weights /= weights.sum()
    draws = rng.choice(vocabulary, size=(n, per_vertex), p=weights)
    return [[f"w{w}" for w in row] for row in draws.tolist()]


def generate_graph(n: int, m: int, gp_size: int, gp_depth: int, per_vertex: int, vocabulary: int,
                   seed: int) -> ProfiledGraph:
    """Seeded G(n, m) graph with synthesized P-trees."""
    import networkx as nx

    if m > n * (n - 1) // 2:
        raise ValueError(f"A simple graph on {n} vertices has at most {n * (n - 1) // 2} edges")
    nxg = nx.gnm_random_graph(n, m, seed=seed)
    edges = np.array(list(nxg.edges()), dtype=np.int64).reshape(-1, 2)
    csr = edges_to_csr(n, edges)
    gp = generate_gptree(gp_size, gp_depth, seed)
    tokens = generate_tokens(n, per_vertex, vocabulary, seed)
    skeleton = ProfiledGraph.from_csr(csr, [EMPTY_TREE] * n, gp)
    return synthesize_ptrees(skeleton, gp, tokens, seed)


# ---------------------------------------------------------------------------
# Sub-datasets for scalability sweeps
# ---------------------------------------------------------------------------

def induced_subgraph(g: ProfiledGraph, vertices) -> ProfiledGraph:
    """Vertex-induced subgraph, relabelled to 0..len(vertices)-1 in ascending order."""
    idx = np.unique(np.asarray(list(vertices), dtype=np.int64))
    sub = g.csr[idx][:, idx]
    names = [g.vertex_names[v] for v in idx] if g.vertex_names is not None else None
    return ProfiledGraph.from_csr(sub, [g.ptrees[v] for v in idx], g.gptree, names)


def sample_vertex_fraction(g: ProfiledGraph, fraction: float, seed: int) -> ProfiledGraph:
    _check_fraction(fraction)
    rng = np.random.default_rng(seed)
    count = int(round(fraction * g.n))
    keep = rng.choice(g.n, size=count, replace=False) if count < g.n else np.arange(g.n)
    return induced_subgraph(g, keep)


def sample_ptree_fraction(g: ProfiledGraph, fraction: float, seed: int) -> ProfiledGraph:
    """Keep a random fraction of every P-tree's nodes, then restore parent-closure."""
    _check_fraction(fraction)
    rng = np.random.default_rng(seed)
    ptrees = []
    for t in g.ptrees:
        if not t:
            ptrees.append(EMPTY_TREE)
            continue
        labels = sorted(t)
        count = max(1, int(round(fraction * len(labels))))
        chosen = rng.choice(labels, size=count, replace=False).tolist()
        ptrees.append(close_under_parents(chosen, g.gptree))
    return ProfiledGraph(g.adjacency, ptrees, g.gptree, g.vertex_names)


def restrict_ptrees(g: ProfiledGraph, keep) -> ProfiledGraph:
    """Cut every P-tree down to the labels whose whole root path lies in keep."""
    keep = set(keep)
    ptrees = []
    for t in g.ptrees:
        ptrees.append(frozenset(x for x in t if all(y in keep for y in g.gptree.root_path(x))))
    return ProfiledGraph(g.adjacency, ptrees, g.gptree, g.vertex_names)


def sample_gptree_fraction(g: ProfiledGraph, fraction: float, seed: int) -> ProfiledGraph:
    _check_fraction(fraction)
    rng = np.random.default_rng(seed)
    size = len(g.gptree)
    count = max(1, int(round(fraction * size)))
    chosen = set(rng.choice(size, size=count, replace=False).tolist())
    chosen.add(ROOT_LABEL)
    return restrict_ptrees(g, chosen)


def _check_fraction(fraction):
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"Fraction must be in (0, 1], got {fraction}")
