from src.PCSQueryAbstract import PCSQueryAbstract, ResultSet
from src.ProfiledGraph import EMPTY_TREE, ProfiledGraph
from src.SubtreeAlgebra import SubtreeCursor


class PCSQueryBasic(PCSQueryAbstract):
    """
    Enumerate the subtrees of T(q) by rightmost extension, depth first.

    A subtree is only extended while it is feasible; a feasible subtree with
    no feasible extension is recorded. initial_members() and verify_child()
    are the hooks the indexed variant replaces.
    """
    name = "basic"

    def initial_members(self):
        return self.peel(list(range(self.graph.n)))

    def verify_child(self, child: SubtreeCursor, members):
        """G_k[child] among all vertices of the graph whose P-tree contains it."""
        self.counters.subtrees_verified += 1
        t = child.tree
        ptrees = self.graph.ptrees
        return self.peel([v for v in range(self.graph.n) if t <= ptrees[v]])

    def search(self):
        gp = self.graph.gptree
        core = self.initial_members()
        if not core:
            return []
        raw = []
        stack = [(SubtreeCursor.from_tree(EMPTY_TREE, gp), core)]
        while stack:
            cursor, members = stack.pop()
            extended = False
            for child in cursor.extensions(self.profile, gp):
                self.counters.subtrees_generated += 1
                found = self.verify_child(child, members)
                if found:
                    extended = True
                    stack.append((child, found))
            if not extended:
                raw.append((cursor.tree, members))
        return raw


def query_basic(g: ProfiledGraph, q, k) -> ResultSet:
    return PCSQueryBasic(g).query(q, k)
