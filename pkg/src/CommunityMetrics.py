#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# This file is part of ProfiledSearch, which is released under the GNU General Public License (GPL).
# See the LICENSE or COPYING file in the root of this project or visit
# http://www.gnu.org/licenses/gpl-3.0.html for the full text of the license.

"""
ProfiledSearch
=================================================================

Quality measures for profiled communities:

    cps   profile similarity of the members inside each community
    ldr   how many labels per taxonomy level another result keeps, relative to ours
    cpf   how often the labels of T(q) occur among community members
    f1    vertex overlap with ground-truth circles

(c) ProfiledSearch, 2024
"""

__author__ = "Ali Karaoglu"
__version__ = "0.1.0"
__date__ = "2024-06-02"

import itertools
import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from src.PCSQueryAbstract import ResultSet
from src.ProfiledGraph import GPTree, ProfiledGraph, PTree


@dataclass
class MetricReport:
    cps: Optional[float] = None
    ldr: Optional[float] = None
    cpf: Optional[float] = None
    f1: Optional[float] = None
    cps_per_community: List[float] = field(default_factory=list)
    ldr_per_level: Dict[int, float] = field(default_factory=dict)
    cpf_per_community: List[float] = field(default_factory=list)
    f1_found_to_truth: List[float] = field(default_factory=list)
    f1_truth_to_found: List[float] = field(default_factory=list)

    @property
    def f1_reverse(self) -> Optional[float]:
        return float(np.mean(self.f1_truth_to_found)) if self.f1_truth_to_found else None

    def to_dict(self):
        values = asdict(self)
        values["f1_reverse"] = self.f1_reverse
        values["ldr_per_level"] = {str(level): ratio for level, ratio in self.ldr_per_level.items()}
        return values

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if value is None or value == [] or value == {}:
                continue
            if isinstance(value, float):
                value = f"{value:.6f}"
            elif isinstance(value, (list, dict)):
                value = json.dumps(value)
            lines.append(f"{key}={value}")
        return "\n".join(lines)


def tree_edit_distance(a: PTree, b: PTree) -> int:
    """Unit-cost insert/delete distance; for two subtrees of one GP-tree it is the symmetric difference."""
    return len(a ^ b)


def community_cps(trees: Sequence[PTree]) -> float:
    size = len(trees)
    if size == 0:
        raise ValueError("CPS of an empty community is undefined")
    total = 0.0
    for a, b in itertools.combinations(trees, 2):
        union = len(a | b)
        if union:
            total += 2.0 * tree_edit_distance(a, b) / union
    return 1.0 - total / size ** 2


def _communities(result) -> list:
    communities = list(result)
    if not communities:
        raise ValueError("The result holds no community")
    return communities


def cps(result: ResultSet, g: ProfiledGraph, breakdown: Optional[list] = None) -> float:
    """Mean over communities of one minus the average normalized TED between member P-trees."""
    values = [community_cps([g.ptrees[v] for v in c.vertices]) for c in _communities(result)]
    if breakdown is not None:
        breakdown.extend(values)
    return float(np.mean(values))


def _labels_per_level(trees: Iterable[PTree], gp: GPTree) -> Counter:
    counts = Counter()
    for t in trees:
        counts.update(gp.depth[x] for x in t)
    return counts


def ldr(q: int, other: ResultSet, pcs_result: ResultSet, g: ProfiledGraph,
        breakdown: Optional[dict] = None) -> float:
    """
    Level-diversity ratio of other against the profiled communities.

    Per level of T(q): labels at that level summed over other's themes,
    divided by the same sum over the profiled themes. Levels where the
    profiled themes have nothing are skipped.
    """
    gp = g.gptree
    profile = g.ptrees[q]
    depth = max((gp.depth[x] for x in profile), default=0)
    ours = _labels_per_level((c.mct for c in _communities(pcs_result)), gp)
    theirs = _labels_per_level((c.mct for c in other), gp)
    ratios = {}
    for level in range(1, depth + 1):
        if ours[level]:
            ratios[level] = theirs[level] / ours[level]
    if not ratios:
        raise ValueError("No level of T(q) is covered by the profiled communities")
    if breakdown is not None:
        breakdown.update(ratios)
    return float(np.mean(list(ratios.values())))


def cpf(q: int, result: ResultSet, g: ProfiledGraph, breakdown: Optional[list] = None) -> float:
    """Average over communities and nodes of T(q) of the share of members carrying that node."""
    profile = sorted(g.ptrees[q])
    if not profile:
        raise ValueError(f"T({q}) is empty")
    communities = _communities(result)
    shares = np.zeros((len(communities), len(profile)))
    for i, c in enumerate(communities):
        for j, x in enumerate(profile):
            shares[i, j] = sum(1 for v in c.vertices if x in g.ptrees[v]) / len(c.vertices)
    if breakdown is not None:
        breakdown.extend(shares.mean(axis=1).tolist())
    return float(shares.sum() / (len(communities) * len(profile)))


def _vertex_sets(communities) -> List[frozenset]:
    return [frozenset(c.vertices) if hasattr(c, "vertices") else frozenset(c) for c in communities]


def f1_score(found: frozenset, truth: frozenset) -> float:
    overlap = len(found & truth)
    if overlap == 0:
        return 0.0
    precision = overlap / len(found)
    recall = overlap / len(truth)
    return 2 * precision * recall / (precision + recall)


def best_matches(found, truth) -> List[float]:
    """For every community in found, the F1 of its best-matching set in truth."""
    found, truth = _vertex_sets(found), _vertex_sets(truth)
    return [max((f1_score(a, b) for b in truth), default=0.0) for a in found]


def f1(found, truth, breakdown: Optional[dict] = None) -> float:
    truth = _vertex_sets(truth)
    if not truth:
        raise ValueError("Ground truth holds no circle")
    forward = best_matches(found, truth)
    if breakdown is not None:
        breakdown["found_to_truth"] = forward
        breakdown["truth_to_found"] = best_matches(truth, found)
    return float(np.mean(forward)) if forward else 0.0


def evaluate(g: ProfiledGraph, q: int, pcs_result: ResultSet, other: Optional[ResultSet] = None,
             truth: Optional[list] = None) -> MetricReport:
    report = MetricReport()
    if len(pcs_result):
        report.cps = cps(pcs_result, g, report.cps_per_community)
        if g.ptrees[q]:
            report.cpf = cpf(q, pcs_result, g, report.cpf_per_community)
        report.ldr = ldr(q, other if other is not None else pcs_result, pcs_result, g, report.ldr_per_level)
    if truth is not None:
        matches = {}
        report.f1 = f1(pcs_result, truth, matches)
        report.f1_found_to_truth = matches["found_to_truth"]
        report.f1_truth_to_found = matches["truth_to_found"]
    return report


def read_truth(lines, source="<truth>") -> List[frozenset]:
    """One circle per line, whitespace-separated vertex ids; '#' lines are comments."""
    circles = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            members = [int(field) for field in line.split()]
        except ValueError:
            raise ValueError(f"{source}, line {lineno}: circle members must be integer vertex ids") from None
        if any(v < 0 for v in members):
            raise ValueError(f"{source}, line {lineno}: negative vertex id")
        circles.append(frozenset(members))
    return circles
