import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from src.CoreStructures import peel_component
from src.ProfiledGraph import EMPTY_TREE, ProfiledGraph, PTree
from src.SubtreeAlgebra import canonical_key, leaves, maximal_common_subtree

logger = logging.getLogger(__name__)

LOCATION_LEVELS = 5


@dataclass(frozen=True)
class Community:
    vertices: tuple
    mct: PTree

    def __contains__(self, v):
        return v in self.vertices

    def __len__(self):
        return len(self.vertices)


@dataclass
class QueryCounters:
    subtrees_generated: int = 0
    subtrees_verified: int = 0
    gkt_computations: int = 0
    index_lookups: int = 0
    candidate_volume: int = 0
    cuts_expanded: int = 0

    def as_dict(self):
        return asdict(self)


@dataclass
class ResultSet:
    communities: List[Community] = field(default_factory=list)
    counters: QueryCounters = field(default_factory=QueryCounters)
    q: Optional[int] = None
    k: Optional[int] = None
    algorithm: str = ""
    profile: PTree = EMPTY_TREE
    seconds: float = 0.0

    def __len__(self):
        return len(self.communities)

    def __iter__(self):
        return iter(self.communities)

    def pairs(self) -> frozenset:
        """Communities as (vertex set, mct) pairs, for order-free comparison."""
        return frozenset((frozenset(c.vertices), c.mct) for c in self.communities)

    def locations(self) -> List[int]:
        """Relative height |mct| / |T(q)| of every community, bucketed into levels 1..5."""
        if not self.profile:
            return []
        size = len(self.profile)
        return [max(1, math.ceil(LOCATION_LEVELS * len(c.mct) / size)) for c in self.communities]

    def to_dict(self, graph: Optional[ProfiledGraph] = None) -> dict:
        """Plain structure for JSON output; with a graph, vertex names and theme paths are added."""
        communities = []
        for c in self.communities:
            entry = {"vertices": list(c.vertices), "mct": sorted(c.mct)}
            if graph is not None:
                entry["names"] = [graph.vertex_name(v) for v in c.vertices]
                entry["mct_paths"] = [graph.gptree.path_name(x) for x in leaves(c.mct, graph.gptree)]
            communities.append(entry)
        return {"q": self.q, "k": self.k, "algorithm": self.algorithm, "profile": sorted(self.profile),
                "seconds": self.seconds, "communities": communities, "counters": self.counters.as_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "ResultSet":
        try:
            communities = [Community(tuple(sorted(int(v) for v in c["vertices"])), frozenset(int(x) for x in c["mct"]))
                           for c in data["communities"]]
            counters = QueryCounters(**data.get("counters", {}))
            return cls(communities, counters, data.get("q"), data.get("k"), data.get("algorithm", ""),
                       frozenset(data.get("profile", ())), float(data.get("seconds", 0.0)))
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"Malformed result structure: {e}") from None


@dataclass(frozen=True)
class Cut:
    """Adjacent pair of an infeasible subtree and its feasible parent; an empty infeasible side means T(q) is feasible."""
    infeasible: PTree
    feasible: PTree

    @property
    def is_full(self):
        return not self.infeasible


class FeasibilityCache:
    """Memo of G_k[T] per subtree; None marks an infeasible subtree."""

    def __init__(self):
        self.memo = {}
        self.infeasible = []

    def __contains__(self, t):
        return t in self.memo

    def __len__(self):
        return len(self.memo)

    def __getitem__(self, t):
        return self.memo[t]

    def store(self, t: PTree, members: Optional[frozenset]):
        members = members or None
        self.memo[t] = members
        if members is None:
            self.infeasible.append(t)
        return members

    def has_infeasible_subtree_of(self, t: PTree) -> bool:
        return any(bad <= t for bad in self.infeasible)


def normalize(raw: Iterable[Tuple[PTree, frozenset]], g: ProfiledGraph, q: int, k: int,
              counters: Optional[QueryCounters] = None) -> ResultSet:
    """
    Turn recorded (subtree, members) pairs into the final communities.

    The theme of each member set is recomputed from the members' P-trees;
    equal themes collapse to one community and themes strictly inside
    another theme are dropped.
    """
    by_mct = {}
    for _, members in raw:
        if not members:
            continue
        mct = maximal_common_subtree([g.ptrees[v] for v in members])
        by_mct.setdefault(mct, frozenset(members))
    kept = [m for m in by_mct if not any(m < other for other in by_mct)]
    kept.sort(key=lambda t: canonical_key(t, g.gptree))
    communities = [Community(tuple(sorted(by_mct[m])), m) for m in kept]
    return ResultSet(communities, counters or QueryCounters(), q, k)


class PCSQueryAbstract:
    """
    Skeleton shared by every query algorithm.

    query() validates the input, prepares the per-query state and calls the
    search() hook, whose recorded (subtree, members) pairs are normalized
    into the result. Subclasses override profile_of() and search().
    """
    name = "abstract"
    needs_index = False

    def __init__(self, graph: ProfiledGraph, index=None):
        if self.needs_index and index is None:
            raise ValueError(f"Algorithm {self.name} needs a CP-tree index")
        self.graph = graph
        self.index = index
        self.q = None
        self.k = None
        self.profile = EMPTY_TREE
        self.counters = QueryCounters()
        self.cache = FeasibilityCache()

    def start(self, q, k, cache: Optional[FeasibilityCache] = None):
        if not isinstance(k, int) or k < 0:
            raise ValueError(f"k must be a non-negative integer, got {k!r}")
        self.q = self.graph.vertex_id(q)
        self.k = k
        self.counters = QueryCounters()
        self.cache = cache if cache is not None else FeasibilityCache()
        self.profile = self.profile_of(self.q)

    def query(self, q, k) -> ResultSet:
        started = time.perf_counter()
        self.start(q, k)
        raw = self.search()
        result = normalize(raw, self.graph, self.q, self.k, self.counters)
        result.algorithm = self.name
        result.profile = self.profile
        result.seconds = time.perf_counter() - started
        logger.debug("%s q=%d k=%d: %d communities, %s", self.name, self.q, self.k, len(result),
                     self.counters.as_dict())
        return result

    def profile_of(self, q) -> PTree:
        return self.graph.ptrees[q]

    def search(self) -> List[Tuple[PTree, frozenset]]:
        raise NotImplementedError

    # shared helpers

    def peel(self, candidates: Sequence[int]) -> frozenset:
        self.counters.gkt_computations += 1
        self.counters.candidate_volume += len(candidates)
        return peel_component(self.graph, candidates, self.k, self.q)
