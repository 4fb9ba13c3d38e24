import logging
import os

from src.CoreStructures import gkt_direct
from src.PCSQueryAbstract import PCSQueryAbstract, ResultSet
from src.ProfiledGraph import ProfiledGraph
from src.SubtreeAlgebra import child_subtrees, count_subtrees, enumerate_subtrees

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_BOUND = 2 ** 16
ORACLE_BOUND_ENV = "PCS_ORACLE_BOUND"


class OracleBoundError(ValueError):
    pass


def oracle_bound() -> int:
    """Subtree budget of the exhaustive search; PCS_ORACLE_BOUND overrides the default."""
    value = os.environ.get(ORACLE_BOUND_ENV)
    if value is None or not value.strip():
        return DEFAULT_ORACLE_BOUND
    try:
        bound = int(value)
    except ValueError:
        raise ValueError(f"{ORACLE_BOUND_ENV} must be an integer, got {value!r}") from None
    if bound < 1:
        raise ValueError(f"{ORACLE_BOUND_ENV} must be positive, got {bound}")
    return bound


class PCSQueryOracle(PCSQueryAbstract):
    """Verify every subtree of T(q) directly and keep the maximal feasible ones."""
    name = "oracle"

    def __init__(self, graph: ProfiledGraph, index=None, bound=None):
        super().__init__(graph, index)
        self.bound = bound if bound is not None else oracle_bound()

    def search(self):
        gp = self.graph.gptree
        total = count_subtrees(self.profile, gp)
        if total > self.bound:
            raise OracleBoundError(f"T({self.q}) has {total} subtrees, above the oracle bound {self.bound}")
        feasible = {}
        for t in enumerate_subtrees(self.profile, gp):
            self.counters.subtrees_generated += 1
            self.counters.subtrees_verified += 1
            self.counters.gkt_computations += 1
            members = gkt_direct(self.graph, self.q, self.k, t)
            if members:
                feasible[t] = members
        return [(t, members) for t, members in feasible.items()
                if not any(c in feasible for c in child_subtrees(t, self.profile, gp))]


def oracle(g: ProfiledGraph, q, k, bound=None) -> ResultSet:
    return PCSQueryOracle(g, bound=bound).query(q, k)
