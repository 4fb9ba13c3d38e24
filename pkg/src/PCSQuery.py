"""
Entry point to the query algorithms by name, as used by the command line and the benchmark.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from src.CPTreeIndex import CPTreeIndex
from src.PCSQueryAbstract import ResultSet
from src.PCSQueryAdvanced import PCSQueryAdvancedD, PCSQueryAdvancedI, PCSQueryAdvancedP
from src.PCSQueryBasic import PCSQueryBasic
from src.PCSQueryIncre import PCSQueryIncre
from src.PCSQueryOracle import PCSQueryOracle
from src.ProfiledGraph import ProfiledGraph

logger = logging.getLogger(__name__)

DEFAULT_K = 6
query_classes = {cls.name: cls for cls in (PCSQueryBasic, PCSQueryIncre, PCSQueryAdvancedI, PCSQueryAdvancedD,
                                           PCSQueryAdvancedP, PCSQueryOracle)}
ALGORITHMS = list(query_classes)


@dataclass
class QueryConfig:
    q: object
    k: int = DEFAULT_K
    algorithm: str = "adv-p"
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 0:
            raise ValueError(f"k must be a non-negative integer, got {self.k!r}")
        self.algorithm = str(self.algorithm).lower()
        if self.algorithm not in query_classes:
            raise ValueError(f"Algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")


def make_query(algorithm: str, graph: ProfiledGraph, index: Optional[CPTreeIndex] = None):
    algorithm = str(algorithm).lower()
    if algorithm not in query_classes:
        raise ValueError(f"Algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    return query_classes[algorithm](graph, index)


def run_query(config: QueryConfig, graph: ProfiledGraph, index: Optional[CPTreeIndex] = None) -> ResultSet:
    return make_query(config.algorithm, graph, index).query(config.q, config.k)
