"""Batch runs: generate, solve with both sharing variants, certify, tabulate."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import stats
from .solver import SolverConfig, solve
from .tessgen import TessGenConfig, generate
from .verify import exact_guard_check


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentRecord:
    run: int
    vertices: int
    edges: int
    regions: int
    sites_recursive: int
    sites_sequential: int
    alpha_deg: float
    epsilon: float


@dataclass(frozen=True)
class RampConfig:
    runs: int
    seed: int
    points: Sequence[int] = (15, 175)
    attempts: Sequence[int] = (30, 250)
    safety: float = 0.995
    min_angle_deg: float = 10.0

    def __post_init__(self):
        if self.runs < 1:
            raise ExperimentError("runs must be at least 1")

    def run_seed(self, run: int) -> int:
        return int(np.random.SeedSequence([int(self.seed), int(run)]).generate_state(1, np.uint64)[0])

    def sizes(self, run: int):
        f = 0.0 if self.runs == 1 else (run - 1) / (self.runs - 1)
        p = int(round(self.points[0] + f * (self.points[1] - self.points[0])))
        a = int(round(self.attempts[0] + f * (self.attempts[1] - self.attempts[0])))
        return p, a


def run_one(cfg: RampConfig, run: int) -> ExperimentRecord:
    seed = cfg.run_seed(run)
    p, a = cfg.sizes(run)
    g = generate(TessGenConfig(seed, p, a, min_angle_deg=cfg.min_angle_deg))
    counts = {}
    for variant in ("recursive", "sequential"):
        sol = solve(g, SolverConfig(variant=variant, safety=cfg.safety))
        rep = exact_guard_check(g, sol)
        if not rep.ok:
            raise ExperimentError(f"run {run} (seed {seed}) failed the certificate with {variant}: {rep.summary()}")
        counts[variant] = len(sol.sites)
    return ExperimentRecord(run, g.n_vertices, g.n_edges, g.n_regions, counts["recursive"],
                            counts["sequential"], math.degrees(sol.report.alpha), sol.report.epsilon)


def run_experiment(cfg: RampConfig, jobs: int = 1) -> List[ExperimentRecord]:
    runs = range(1, cfg.runs + 1)
    if jobs <= 1:
        return [run_one(cfg, r) for r in runs]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        # map keeps run order whatever the completion order
        return list(ex.map(run_one, [cfg] * cfg.runs, runs))


def analyse(table: Dict[str, np.ndarray], ddof: int = 1) -> Dict:
    e = table["edges"]
    out: Dict = {"summary": {}, "correlations": {}, "regressions": {}, "histograms": {}, "poisson_rate": {}}
    for name, row in zip(("median", "mean", "std"), zip(*[stats.summary(table[c], ddof) for c in stats.CSV_COLUMNS[1:]])):
        out["summary"][name] = dict(zip(stats.CSV_COLUMNS[1:], row))
    pairs = {"alpha_vs_edges": ("alpha_deg", "edges"), "epsilon_vs_edges": ("epsilon", "edges"),
             "alpha_vs_epsilon": ("alpha_deg", "epsilon")}
    for key, (a, b) in pairs.items():
        try:
            out["correlations"][key] = stats.pearson(table[a], table[b])
        except stats.StatsError:
            out["correlations"][key] = None
    for variant in ("sequential", "recursive"):
        try:
            slope, icpt = stats.linfit(e, table[f"sites_{variant}"])
            out["regressions"][variant] = {"slope": slope, "intercept": icpt}
        except stats.StatsError:
            out["regressions"][variant] = None
    for col in ("alpha_deg", "epsilon"):
        edges, counts = stats.histogram(table[col], 20)
        out["histograms"][col] = {"edges": edges.tolist(), "counts": counts.tolist()}
        out["poisson_rate"][col] = stats.poisson_mle(table[col])
    return out


def write_outputs(records: Sequence[ExperimentRecord], csv_path, ddof: int = 1) -> Dict:
    """CSV with summary rows, a JSON analysis and PNG figures next to it."""
    csv_path = Path(csv_path)
    rows = [astuple(r) for r in records]
    table = {c: np.asarray([r[i] for r in rows], dtype=float) for i, c in enumerate(stats.CSV_COLUMNS)}
    extra = stats.summary_rows(table, ddof=ddof) if len(rows) > ddof else []
    stats.write_table(rows, csv_path, extra_rows=extra)
    result = analyse(table, ddof) if len(rows) > 1 else {}
    stem = csv_path.with_suffix("")
    Path(f"{stem}_analysis.json").write_text(json.dumps(result, indent=1, sort_keys=True) + "\n")
    if result:
        from .plots import plot_histograms, plot_sites_vs_edges

        plot_histograms(table, result, f"{stem}_histograms.png")
        plot_sites_vs_edges(table, result, f"{stem}_sites_vs_edges.png")
    return result
