#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# This file is part of ProfiledSearch, which is released under the GNU General Public License (GPL).
# See the LICENSE or COPYING file in the root of this project or visit
# http://www.gnu.org/licenses/gpl-3.0.html for the full text of the license.

"""
ProfiledSearch
=================================================================

Border search over the lattice of subtrees of T(q). A first cut (an
infeasible subtree next to a feasible one) is located by one of three
strategies, then the border is walked cut by cut and every maximal
feasible subtree met on the way is recorded.

    I   grow subtrees by rightmost extension until the first dead end
    D   shrink T(q) leaf by leaf until it becomes feasible
    P   merge root paths of leaf labels, bisect the first failing path

(c) ProfiledSearch, 2024
"""

__author__ = "Ali Karaoglu"
__version__ = "0.1.0"
__date__ = "2024-06-02"

import logging
from collections import deque
from typing import Optional

from src.CPTreeIndex import CPTreeIndex
from src.PCSQueryAbstract import Cut, FeasibilityCache, ResultSet, normalize
from src.PCSQueryIncre import PCSQueryIncre
from src.ProfiledGraph import EMPTY_TREE, ROOT_LABEL, PTree
from src.SubtreeAlgebra import (SubtreeCursor, child_subtrees, common_child, leaves, parent_subtrees,
                                root_path)

logger = logging.getLogger(__name__)

STRATEGIES = ["I", "D", "P"]


class PCSQueryAdvanced(PCSQueryIncre):
    name = "adv"
    strategy = None
    # re-verify both sides of every pushed cut; used by the test suite
    validate_cuts = False

    def search(self):
        cut = self.find_cut()
        if cut is None:
            return []
        logger.debug("%s initial cut: IF=%s F=%s", self.name, sorted(cut.infeasible), sorted(cut.feasible))
        return self.expand_ptree(cut)

    def find_cut(self) -> Optional[Cut]:
        raise NotImplementedError

    # -- verification ----------------------------------------------------

    def verify_ptree(self, t: PTree, context: Optional[frozenset] = None) -> Optional[frozenset]:
        """
        G_k[t], or None when t is infeasible. Memoized per subtree.

        Peels inside the intersection of the index cores of t's leaf labels,
        further bounded by context (the members of a feasible subtree of t)
        when one is known. A single root path is answered by the index alone.
        """
        t = frozenset(t)
        if t in self.cache:
            return self.cache[t]
        if not t:
            return self.cache.store(t, self.lookup_core())
        if self.cache.has_infeasible_subtree_of(t):
            return self.cache.store(t, None)
        bounds = []
        for label in leaves(t, self.graph.gptree):
            bound = self.lookup(label)
            if not bound:
                return self.cache.store(t, None)
            bounds.append(bound)
        if len(bounds) == 1:
            return self.cache.store(t, bounds[0])
        bounds.sort(key=len)
        candidates = set(context) if context is not None else set(bounds[0])
        for bound in bounds:
            candidates &= bound
        self.counters.subtrees_verified += 1
        return self.cache.store(t, self.peel(list(candidates)))

    def verify_extension(self, child: SubtreeCursor, members) -> Optional[frozenset]:
        if child.tree in self.cache:
            return self.cache[child.tree]
        return self.cache.store(child.tree, self.verify_child(child, members))

    # -- border walk -----------------------------------------------------

    def check_cut(self, cut: Cut):
        feasible = self.verify_ptree(cut.feasible)
        if feasible is None:
            raise ValueError(f"Invalid cut: feasible side {sorted(cut.feasible)} is infeasible")
        if cut.is_full:
            if cut.feasible != self.profile:
                raise ValueError("Invalid cut: an empty infeasible side requires the feasible side to be T(q)")
            return
        if len(cut.infeasible) != len(cut.feasible) + 1 or not cut.feasible < cut.infeasible:
            raise ValueError("Invalid cut: the infeasible side must add one node to the feasible side")
        if self.verify_ptree(cut.infeasible) is not None:
            raise ValueError(f"Invalid cut: infeasible side {sorted(cut.infeasible)} is feasible")

    def expand_ptree(self, cut: Cut):
        self.check_cut(cut)
        if cut.is_full:
            return [(cut.feasible, self.verify_ptree(cut.feasible))]
        gp = self.graph.gptree
        recorded = {}
        queue = deque([cut])
        visited = {(cut.infeasible, cut.feasible)}

        def push(new_cut):
            key = (new_cut.infeasible, new_cut.feasible)
            if key in visited:
                return
            if self.validate_cuts:
                self.check_cut(new_cut)
            visited.add(key)
            queue.append(new_cut)

        while queue:
            current = queue.popleft()
            self.counters.cuts_expanded += 1
            for y in parent_subtrees(current.infeasible, gp):
                y_members = self.verify_ptree(y)
                if y_members is not None:
                    maximal = True
                    for child in child_subtrees(y, self.profile, gp):
                        self.counters.subtrees_generated += 1
                        if self.verify_ptree(child, y_members) is None:
                            push(Cut(child, y))
                        else:
                            maximal = False
                            push(Cut(common_child(child, current.infeasible, self.profile), child))
                    if maximal:
                        recorded[y] = y_members
                else:
                    for below in parent_subtrees(y, gp):
                        if self.verify_ptree(below) is not None:
                            push(Cut(y, below))
        return list(recorded.items())

    def expand(self, cut: Cut) -> ResultSet:
        raw = self.expand_ptree(cut) if cut is not None else []
        result = normalize(raw, self.graph, self.q, self.k, self.counters)
        result.algorithm = self.name
        result.profile = self.profile
        return result


class PCSQueryAdvancedI(PCSQueryAdvanced):
    name = "adv-i"
    strategy = "I"

    def find_cut(self):
        core = self.verify_ptree(EMPTY_TREE)
        if core is None:
            return None
        gp = self.graph.gptree
        stack = [(SubtreeCursor.from_tree(EMPTY_TREE, gp), core)]
        while stack:
            cursor, members = stack.pop()
            extended = False
            last_infeasible = None
            for child in cursor.extensions(self.profile, gp):
                self.counters.subtrees_generated += 1
                found = self.verify_extension(child, members)
                if found:
                    extended = True
                    stack.append((child, found))
                else:
                    last_infeasible = child.tree
            if extended:
                continue
            if last_infeasible is not None:
                return Cut(last_infeasible, cursor.tree)
            if cursor.tree == self.profile:
                return Cut(EMPTY_TREE, self.profile)
            # no rightmost extension left: fall back to the other lattice children
            for child in child_subtrees(cursor.tree, self.profile, gp):
                if self.verify_ptree(child, members) is None:
                    return Cut(child, cursor.tree)
        return Cut(EMPTY_TREE, self.profile)


class PCSQueryAdvancedD(PCSQueryAdvanced):
    name = "adv-d"
    strategy = "D"

    def find_cut(self):
        if self.verify_ptree(EMPTY_TREE) is None:
            return None
        if self.verify_ptree(self.profile) is not None:
            return Cut(EMPTY_TREE, self.profile)
        gp = self.graph.gptree
        stack = [self.profile]
        seen = {self.profile}
        while stack:
            t = stack.pop()
            for smaller in parent_subtrees(t, gp):
                self.counters.subtrees_generated += 1
                if self.verify_ptree(smaller) is not None:
                    return Cut(t, smaller)
                if smaller not in seen:
                    seen.add(smaller)
                    stack.append(smaller)
        raise RuntimeError("No feasible subtree below T(q) although the empty tree is feasible")


class PCSQueryAdvancedP(PCSQueryAdvanced):
    name = "adv-p"
    strategy = "P"

    def find_cut(self):
        if self.verify_ptree(EMPTY_TREE) is None:
            return None
        if not self.profile:
            return Cut(EMPTY_TREE, self.profile)
        gp = self.graph.gptree
        leaf_labels = leaves(self.profile, gp)

        frontier = leaf_labels
        seed = None
        while seed is None:
            for label in frontier:
                if self.verify_ptree(root_path(label, gp)) is not None:
                    seed = label
                    break
            if seed is not None:
                break
            parents = []
            for label in frontier:
                p = gp.parent[label]
                if label != ROOT_LABEL and p not in parents:
                    parents.append(p)
            if not parents:
                return Cut(frozenset((ROOT_LABEL,)), EMPTY_TREE)
            frontier = parents

        feasible = root_path(seed, gp)
        members = self.verify_ptree(feasible)
        pending = list(frontier) + [label for label in leaf_labels if label not in frontier]
        for label in pending:
            if label in feasible:
                continue
            merged = feasible | root_path(label, gp)
            found = self.verify_ptree(merged, members)
            if found is not None:
                feasible, members = merged, found
                continue
            return self.boundary_on_path(feasible, members, label)
        return Cut(EMPTY_TREE, self.profile)

    def boundary_on_path(self, feasible, members, label) -> Cut:
        """Bisect the root path of label for the deepest node that can still join feasible."""
        gp = self.graph.gptree
        path = list(reversed(gp.root_path(label)))
        top = next(i for i, x in enumerate(path) if x in feasible)
        low, high = 0, top
        while high - low > 1:
            mid = (low + high) // 2
            if self.verify_ptree(feasible | root_path(path[mid], gp), members) is not None:
                high = mid
            else:
                low = mid
        upper = feasible | root_path(path[high], gp)
        return Cut(upper | {path[low]}, upper)


advanced_classes = {cls.strategy: cls for cls in (PCSQueryAdvancedI, PCSQueryAdvancedD, PCSQueryAdvancedP)}


def advanced_class(strategy):
    key = str(strategy).upper()
    if key not in advanced_classes:
        raise ValueError(f"Strategy must be one of {STRATEGIES}, got {strategy!r}")
    return advanced_classes[key]


def _prepared(idx: CPTreeIndex, q, k, strategy="P", cache: Optional[FeasibilityCache] = None) -> PCSQueryAdvanced:
    search = advanced_class(strategy)(idx.graph, idx)
    search.start(q, k, cache)
    return search


def verify_ptree(idx: CPTreeIndex, q, k, t: PTree, cache: Optional[FeasibilityCache] = None,
                 context: Optional[frozenset] = None) -> Optional[frozenset]:
    return _prepared(idx, q, k, cache=cache).verify_ptree(t, context)


def find_i(idx: CPTreeIndex, q, k) -> Optional[Cut]:
    return _prepared(idx, q, k, "I").find_cut()


def find_d(idx: CPTreeIndex, q, k) -> Optional[Cut]:
    return _prepared(idx, q, k, "D").find_cut()


def find_p(idx: CPTreeIndex, q, k) -> Optional[Cut]:
    return _prepared(idx, q, k, "P").find_cut()


def expand_ptree(idx: CPTreeIndex, q, k, cut: Cut, cache: Optional[FeasibilityCache] = None) -> ResultSet:
    return _prepared(idx, q, k, cache=cache).expand(cut)


def query_advanced(idx: CPTreeIndex, q, k, strategy="P") -> ResultSet:
    return advanced_class(strategy)(idx.graph, idx).query(q, k)
