"""Descriptive statistics for experiment tables."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

CSV_COLUMNS = ("run", "vertices", "edges", "regions", "sites_recursive", "sites_sequential", "alpha_deg", "epsilon")


class StatsError(ValueError):
    pass


@dataclass
class Series:
    label: str
    values: np.ndarray

    def __init__(self, label: str, values: Sequence[float]):
        self.label = label
        self.values = np.asarray(values, dtype=float).ravel()

    def __len__(self) -> int:
        return len(self.values)


def _vals(s) -> np.ndarray:
    v = s.values if isinstance(s, Series) else np.asarray(s, dtype=float).ravel()
    if len(v) == 0:
        raise StatsError("empty series")
    return v


def summary(s, ddof: int = 1) -> Tuple[float, float, float]:
    """(median, mean, standard deviation); ``ddof=1`` is the sample convention."""
    v = _vals(s)
    if ddof not in (0, 1):
        raise StatsError("ddof must be 0 (population) or 1 (sample)")
    if len(v) <= ddof:
        raise StatsError("not enough values for the requested deviation")
    return float(np.median(v)), float(v.mean()), float(v.std(ddof=ddof))


def pearson(x, y) -> float:
    a, b = _vals(x), _vals(y)
    if len(a) != len(b) or len(a) < 2:
        raise StatsError("series must have equal length of at least 2")
    da, db = a - a.mean(), b - b.mean()
    sa, sb = math.sqrt(float(da @ da)), math.sqrt(float(db @ db))
    if sa == 0 or sb == 0:
        raise StatsError("zero variance")
    return max(-1.0, min(1.0, float(da @ db) / (sa * sb)))


def linfit(x, y) -> Tuple[float, float]:
    """Ordinary least squares ``y = slope * x + intercept``."""
    a, b = _vals(x), _vals(y)
    if len(a) != len(b) or len(a) < 2:
        raise StatsError("series must have equal length of at least 2")
    da = a - a.mean()
    sxx = float(da @ da)
    if sxx == 0:
        raise StatsError("x is constant")
    slope = float(da @ (b - b.mean())) / sxx
    return slope, float(b.mean() - slope * a.mean())


def histogram(s, bins: int) -> Tuple[np.ndarray, np.ndarray]:
    """Equal-width bins over [min, max]; every bin right-open except the last.

    A constant series puts all its mass in the first bin of a unit-wide range.
    """
    v = _vals(s)
    if bins < 1:
        raise StatsError("bins must be at least 1")
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.floor((v - lo) / (hi - lo) * bins).astype(np.int64)
    idx = np.clip(idx, 0, bins - 1)
    if float(v.min()) == float(v.max()):
        idx[:] = 0
    return edges, np.bincount(idx, minlength=bins)


def poisson_mle(s) -> float:
    """Maximum-likelihood Poisson rate, i.e. the sample mean."""
    return float(_vals(s).mean())


# ---------------------------------------------------------------------------
# experiment tables

def read_table(path_or_text) -> Dict[str, np.ndarray]:
    """Numeric columns of an experiment CSV; non-numeric ``run`` rows are skipped."""
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text):
        text = Path(path_or_text).read_text()
    else:
        text = path_or_text
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise StatsError("empty table")
    header = rows[0]
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise StatsError(f"missing columns: {', '.join(missing)}")
    out: Dict[str, List[float]] = {c: [] for c in header}
    for r in rows[1:]:
        if not r or not r[0].strip().lstrip("-").isdigit():
            continue
        for c, val in zip(header, r):
            out[c].append(float(val))
    return {c: np.asarray(v) for c, v in out.items()}


def format_row(values: Sequence) -> List[str]:
    return [repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in values]


def write_table(records: Sequence[Sequence], path=None, extra_rows: Sequence[Sequence] = ()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(format_row(r))
    for r in extra_rows:
        w.writerow(format_row(r))
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def summary_rows(table: Dict[str, np.ndarray], ddof: int = 1) -> List[List]:
    """MED, AVG and STD rows over the data columns."""
    rows = {"MED": [], "AVG": [], "STD": []}
    for c in CSV_COLUMNS[1:]:
        med, mean, std = summary(table[c], ddof=ddof)
        rows["MED"].append(med)
        rows["AVG"].append(mean)
        rows["STD"].append(std)
    return [[k] + v for k, v in rows.items()]


def reference_runs() -> Dict[str, np.ndarray]:
    """The 40 published experiment rows shipped with the package."""
    from importlib.resources import files

    return read_table(files("givp").joinpath("data/reference_runs.csv").read_text())
