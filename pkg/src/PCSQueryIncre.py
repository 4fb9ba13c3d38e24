from src.CPTreeIndex import CPTreeIndex, get, restore_ptree
from src.CoreStructures import k_hat_core
from src.PCSQueryAbstract import ResultSet
from src.PCSQueryBasic import PCSQueryBasic


class PCSQueryIncre(PCSQueryBasic):
    """
    The basic enumeration on top of the CP-tree index. A new subtree is peeled
    inside G_k[parent] intersected with the index core of its new node, and
    T(q) is restored from the head map.
    """
    name = "incre"
    needs_index = True

    def profile_of(self, q):
        return restore_ptree(self.index, q)

    def lookup(self, label):
        self.counters.index_lookups += 1
        return get(self.index, self.k, self.q, label)

    def lookup_core(self):
        self.counters.index_lookups += 1
        return k_hat_core(self.index.graph_cltree, self.k, self.q)

    def initial_members(self):
        return self.lookup_core()

    def verify_child(self, child, members):
        self.counters.subtrees_verified += 1
        bound = self.lookup(child.rightmost_path[-1])
        return self.peel([v for v in members if v in bound])


def query_incre(idx: CPTreeIndex, q, k) -> ResultSet:
    return PCSQueryIncre(idx.graph, idx).query(q, k)
