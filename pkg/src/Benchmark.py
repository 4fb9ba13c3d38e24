"""
Scalability sweeps over sub-datasets of a profiled graph.

Each sweep cell derives a graph (a fraction of the vertices, of every
P-tree, or of the GP-tree, or the full graph at another k), builds its
CP-tree index, runs the selected algorithms over a seeded sample of query
vertices and records wall time and search counters.

Outputs (in the output directory):
  - bench_results.json
  - bench_results.csv
  - bench_build.png, bench_query.png   (with plots enabled)
"""

import csv
import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from scipy.stats import linregress  # noqa: E402
from tqdm import tqdm  # noqa: E402

from src.CPTreeIndex import build_index  # noqa: E402
from src.CoreStructures import core_decomposition  # noqa: E402
from src.PCSQuery import ALGORITHMS, DEFAULT_K, make_query  # noqa: E402
from src.PCSQueryAbstract import LOCATION_LEVELS  # noqa: E402
from src.ProfiledGraph import (ProfiledGraph, sample_gptree_fraction, sample_ptree_fraction,  # noqa: E402
                               sample_vertex_fraction)

logger = logging.getLogger(__name__)

FRACTION_SWEEPS = {
    "vertex": sample_vertex_fraction,
    "ptree": sample_ptree_fraction,
    "gptree": sample_gptree_fraction,
}
SWEEPS = list(FRACTION_SWEEPS) + ["k"]
COUNTER_COLUMNS = ["seconds", "generated", "verified", "gkt", "lookups", "volume", "communities"]


@dataclass
class SweepConfig:
    sweeps: Tuple[str, ...] = ("vertex", "ptree", "gptree", "k")
    fractions: Tuple[float, ...] = (0.2, 0.4, 0.6, 0.8, 1.0)
    k_values: Tuple[int, ...] = (4, 5, 6, 7, 8)
    k: int = DEFAULT_K
    queries: int = 20
    algorithms: Tuple[str, ...] = ("basic", "incre", "adv-p")
    seed: int = 0
    workers: int = 1
    compress: bool = False

    def __post_init__(self):
        self.sweeps = tuple(str(s).lower() for s in self.sweeps)
        self.algorithms = tuple(str(a).lower() for a in self.algorithms)
        for sweep in self.sweeps:
            if sweep not in SWEEPS:
                raise ValueError(f"Sweep must be one of {SWEEPS}, got {sweep!r}")
        for algorithm in self.algorithms:
            if algorithm not in ALGORITHMS:
                raise ValueError(f"Algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
        for fraction in self.fractions:
            if not 0.0 < fraction <= 1.0:
                raise ValueError(f"Fraction must be in (0, 1], got {fraction}")
        if any(k < 0 for k in (self.k, *self.k_values)):
            raise ValueError("k values must be non-negative")
        if self.queries < 1:
            raise ValueError(f"At least one query per cell is needed, got {self.queries}")
        if self.workers < 1:
            raise ValueError(f"workers must be positive, got {self.workers}")


@dataclass
class BenchReport:
    config: SweepConfig
    records: List[dict] = field(default_factory=list)
    fit: Optional[dict] = None

    def to_dict(self):
        return {"config": asdict(self.config), "fit": self.fit, "records": self.records}


def sample_queries(g: ProfiledGraph, k: int, count: int, seed: int) -> List[int]:
    """Up to count vertices with core number at least k, ascending."""
    cores = core_decomposition(g)
    eligible = [v for v in range(g.n) if cores[v] >= k]
    if len(eligible) <= count:
        return eligible
    rng = np.random.default_rng(seed)
    return sorted(int(v) for v in rng.choice(eligible, size=count, replace=False))


def run_cell(sweep: str, value, g: ProfiledGraph, k: int, config: SweepConfig) -> dict:
    idx = build_index(g, compress=config.compress)
    build_seconds = idx.build_seconds
    queries = sample_queries(g, k, config.queries, config.seed)
    record = {
        "sweep": sweep, "value": value, "k": k, "n": g.n, "m": g.m,
        "entries": idx.entry_count(), "size": idx.entry_count() + g.m,
        "build_seconds": build_seconds, "queries": len(queries),
    }
    locations = Counter()
    for algorithm in config.algorithms:
        totals = dict.fromkeys(COUNTER_COLUMNS, 0)
        search = make_query(algorithm, g, idx)
        for q in queries:
            result = search.query(q, k)
            counters = result.counters
            totals["seconds"] += result.seconds
            totals["generated"] += counters.subtrees_generated
            totals["verified"] += counters.subtrees_verified
            totals["gkt"] += counters.gkt_computations
            totals["lookups"] += counters.index_lookups
            totals["volume"] += counters.candidate_volume
            totals["communities"] += len(result)
            if algorithm == config.algorithms[0]:
                locations.update(result.locations())
        for column, total in totals.items():
            record[f"{algorithm}_{column}"] = total
    for level in range(1, LOCATION_LEVELS + 1):
        record[f"location_{level}"] = locations[level]
    logger.info("bench %s=%s k=%d: n=%d entries=%d build %.3f s", sweep, value, k, g.n, record["entries"],
                build_seconds)
    return record


def _cells(g: ProfiledGraph, config: SweepConfig):
    for sweep in config.sweeps:
        if sweep == "k":
            for k in config.k_values:
                yield sweep, k, (lambda: g), k
        else:
            derive = FRACTION_SWEEPS[sweep]
            for fraction in config.fractions:
                yield sweep, fraction, (lambda d=derive, f=fraction: d(g, f, config.seed)), config.k


def scaling_fit(records: List[dict], sweep="vertex") -> Optional[dict]:
    """Least-squares fit of build time against sum |T(v)| + m over one sweep."""
    points = [(r["size"], r["build_seconds"]) for r in records if r["sweep"] == sweep]
    if len({x for x, _ in points}) < 2:
        return None
    x, y = np.array(points, dtype=float).T
    fit = linregress(x, y)
    return {"sweep": sweep, "slope": float(fit.slope), "intercept": float(fit.intercept),
            "r_squared": float(fit.rvalue ** 2)}


def run_benchmark(g: ProfiledGraph, config: SweepConfig, progress=True) -> BenchReport:
    # materialize shared lazy views before the worker threads read them
    g.csr
    g.neighbor_sets
    cells = list(_cells(g, config))
    records = [None] * len(cells)
    with ThreadPoolExecutor(max_workers=config.workers) as ex:
        futures = {}
        for position, (sweep, value, derive, k) in enumerate(cells):
            futures[ex.submit(lambda d=derive, s=sweep, v=value, kk=k: run_cell(s, v, d(), kk, config))] = position
        for fut in tqdm(as_completed(futures), total=len(futures), desc="Bench cells", unit="cell",
                        disable=not progress):
            records[futures[fut]] = fut.result()
    return BenchReport(config, records, scaling_fit(records))


def format_table(records: List[dict], algorithms) -> str:
    columns = ["sweep", "value", "k", "n", "entries", "build_seconds"]
    for algorithm in algorithms:
        columns += [f"{algorithm}_seconds", f"{algorithm}_verified"]
    rows = [columns]
    for r in records:
        rows.append([f"{r[c]:.4f}" if isinstance(r[c], float) else str(r[c]) for c in columns])
    widths = [max(len(row[i]) for row in rows) for i in range(len(columns))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows)


def write_results(report: BenchReport, out_dir) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "bench_results.json"
    with open(json_path, "w") as f:
        json.dump(report.to_dict(), f, indent=2)
    csv_path = out_dir / "bench_results.csv"
    keys = list(report.records[0]) if report.records else []
    with open(csv_path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=keys)
        w.writeheader()
        for r in report.records:
            w.writerow(r)
    return [json_path, csv_path]


def write_plots(report: BenchReport, out_dir) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fraction_sweeps = [s for s in report.config.sweeps if s != "k"]

    build_path = out_dir / "bench_build.png"
    plt.figure(figsize=(8, 5))
    for sweep in fraction_sweeps:
        recs = [r for r in report.records if r["sweep"] == sweep]
        plt.plot([r["value"] for r in recs], [r["build_seconds"] for r in recs], marker="o", label=sweep)
    plt.xlabel("fraction")
    plt.ylabel("build time (s)")
    plt.title("CP-tree construction")
    plt.legend()
    plt.tight_layout()
    plt.savefig(build_path)
    plt.close()

    query_path = out_dir / "bench_query.png"
    plt.figure(figsize=(8, 5))
    k_recs = [r for r in report.records if r["sweep"] == "k"] or [r for r in report.records if r["sweep"] == "vertex"]
    x_key = "k" if k_recs and k_recs[0]["sweep"] == "k" else "value"
    for algorithm in report.config.algorithms:
        plt.plot([r[x_key] for r in k_recs], [r[f"{algorithm}_seconds"] for r in k_recs], marker="o",
                 label=algorithm)
    plt.xlabel(x_key)
    plt.ylabel("query time (s)")
    plt.title("Query time")
    plt.legend()
    plt.tight_layout()
    plt.savefig(query_path)
    plt.close()
    return [build_path, query_path]
