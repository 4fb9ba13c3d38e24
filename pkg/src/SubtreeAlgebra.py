#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# This file is part of ProfiledSearch, which is released under the GNU General Public License (GPL).
# See the LICENSE or COPYING file in the root of this project or visit
# http://www.gnu.org/licenses/gpl-3.0.html for the full text of the license.

"""
ProfiledSearch
=================================================================

Operations on P-trees seen as node sets of the GP-tree: the subtree
relation, rightmost-path extension, the lattice neighborhood used by the
border search, maximal common subtrees and subtree counting.

(c) ProfiledSearch, 2024
"""

__author__ = "Ali Karaoglu"
__version__ = "0.1.0"
__date__ = "2024-06-02"

from collections import deque
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, List, Sequence

from src.ProfiledGraph import EMPTY_TREE, ROOT_LABEL, GPTree, PTree


@dataclass(frozen=True)
class SubtreeCursor:
    """A subtree together with its rightmost path, so extensions need not recompute it."""
    tree: PTree
    rightmost_path: tuple

    @classmethod
    def from_tree(cls, tree: PTree, gp: GPTree):
        tree = frozenset(tree)
        if not tree:
            return cls(EMPTY_TREE, ())
        path = [ROOT_LABEL]
        while True:
            present = [c for c in gp.children[path[-1]] if c in tree]
            if not present:
                break
            path.append(present[-1])
        return cls(tree, tuple(path))

    def extensions(self, bound: PTree, gp: GPTree) -> List["SubtreeCursor"]:
        """Every one-node extension of tree inside bound whose new node becomes the rightmost leaf."""
        if not self.tree:
            return [SubtreeCursor(frozenset((ROOT_LABEL,)), (ROOT_LABEL,))] if ROOT_LABEL in bound else []
        found = []
        path = self.rightmost_path
        for i, p in enumerate(path):
            last = path[i + 1] if i + 1 < len(path) else -1
            for c in gp.children[p]:
                if c > last and c in bound and c not in self.tree:
                    found.append(SubtreeCursor(self.tree | {c}, path[:i + 1] + (c,)))
        found.sort(key=lambda cursor: gp.rank[cursor.rightmost_path[-1]])
        return found


def is_subtree(s: PTree, t: PTree) -> bool:
    return s <= t


def canonical_key(t: Iterable[int], gp: GPTree) -> tuple:
    return tuple(sorted(gp.rank[x] for x in t))


def sort_canonical(trees: Iterable[PTree], gp: GPTree) -> List[PTree]:
    return sorted(trees, key=lambda t: canonical_key(t, gp))


def leaves(t: PTree, gp: GPTree) -> List[int]:
    """Members of t with no child inside t, in canonical order."""
    parents = {gp.parent[x] for x in t}
    return sorted((x for x in t if x not in parents), key=gp.rank.__getitem__)


def root_path(label: int, gp: GPTree) -> PTree:
    return frozenset(gp.root_path(label))


def generate_subtrees(t_prime: PTree, bound: PTree, gp: GPTree) -> List[PTree]:
    cursor = SubtreeCursor.from_tree(t_prime, gp)
    return [c.tree for c in cursor.extensions(bound, gp)]


def parent_subtrees(t: PTree, gp: GPTree) -> List[PTree]:
    """Trees obtained from t by removing one leaf; {root} yields the empty tree."""
    if not t:
        raise ValueError("The empty tree has no parent subtrees")
    if t == {ROOT_LABEL}:
        return [EMPTY_TREE]
    return sort_canonical((t - {x} for x in leaves(t, gp) if x != ROOT_LABEL), gp)


def child_subtrees(t: PTree, bound: PTree, gp: GPTree) -> List[PTree]:
    """Trees obtained from t by adding one node of bound whose parent is already in t."""
    if not t:
        return [frozenset((ROOT_LABEL,))] if ROOT_LABEL in bound else []
    added = [x for x in bound if x not in t and gp.parent[x] in t]
    added.sort(key=gp.rank.__getitem__)
    return [t | {x} for x in added]


def common_child(c_i: PTree, c_j: PTree, bound: PTree = None) -> PTree:
    union = c_i | c_j
    if bound is not None and not union <= bound:
        raise ValueError("Common child leaves the bounding tree")
    return union


def maximal_common_subtree(trees: Sequence[PTree]) -> PTree:
    trees = list(trees)
    if not trees:
        raise ValueError("maximal_common_subtree needs at least one tree")
    return frozenset(reduce(frozenset.intersection, trees[1:], frozenset(trees[0])))


def count_subtrees(t: PTree, gp: GPTree) -> int:
    """Number of subtrees of t, the empty tree included."""
    if not t:
        return 1
    rooted = {}
    for x in sorted(t, key=gp.rank.__getitem__, reverse=True):
        product = 1
        for c in gp.children[x]:
            if c in t:
                product *= 1 + rooted[c]
        rooted[x] = product
    return rooted[ROOT_LABEL] + 1


def enumerate_subtrees(bound: PTree, gp: GPTree) -> List[PTree]:
    """All subtrees of bound (empty tree first) by breadth-first search over the lattice."""
    seen = {EMPTY_TREE}
    queue = deque([EMPTY_TREE])
    order = []
    while queue:
        t = queue.popleft()
        order.append(t)
        for child in child_subtrees(t, bound, gp):
            if child not in seen:
                seen.add(child)
                queue.append(child)
    return order


@lru_cache(maxsize=None)
def max_subtree_count(x: int) -> int:
    """
    Largest number of subtrees (empty tree included) a tree with x nodes can have.

    Splits the tree into a rooted part of i nodes and a remainder of x - i nodes
    and keeps the best split; splits with an empty side refer back to x itself
    and are skipped.
    """
    if x < 0:
        raise ValueError("Node count must be non-negative")
    if x == 0:
        return 1
    if x == 1:
        return 2
    return max(max_subtree_count(i) * (max_subtree_count(x - i) - 1) for i in range(1, x)) + 1
