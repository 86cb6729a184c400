"""Nonparametric tests and correlations for model comparison.

Statistics are computed from first principles (midranks, pair counts, exact
enumeration where feasible); p-values come from scipy's distribution functions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import kolmogorov
from scipy.stats import chi2, norm, rankdata
from scipy.stats import t as t_dist

from .errors import InputError

WILCOXON_EXACT_MAX_N = 25

# Studentized-range quantiles divided by sqrt(2), for k = 2..20 models.
NEMENYI_Q = {
    0.05: [
        1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878,
        3.101730, 3.163684, 3.218654, 3.268004, 3.312739, 3.353618, 3.391230,
        3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
    ],
    0.01: [
        2.575829, 2.913494, 3.113250, 3.254686, 3.363740, 3.452213, 3.526471,
        3.590339, 3.646292, 3.696021, 3.740733, 3.781318, 3.818451, 3.852654,
        3.884343, 3.913850, 3.941446, 3.967357, 3.991770,
    ],
}


def _as_array(x: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"{name} must be a non-empty 1-d sample")
    return arr


def ks_two_sample(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Two-sample KS test: D = sup |ECDF_x - ECDF_y|, asymptotic p-value."""
    xa, ya = _as_array(x, "x"), _as_array(y, "y")
    xs, ys = np.sort(xa), np.sort(ya)
    grid = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, grid, side="right") / xs.size
    cdf_y = np.searchsorted(ys, grid, side="right") / ys.size
    d = float(np.max(np.abs(cdf_x - cdf_y)))
    effective = xs.size * ys.size / (xs.size + ys.size)
    p = float(kolmogorov(math.sqrt(effective) * d))
    return d, min(max(p, 0.0), 1.0)


def mann_whitney_u(x: Sequence[float], y: Sequence[float],
                   two_sided: bool = True) -> tuple[float, float]:
    """Mann-Whitney U (ties count half) with tie- and continuity-corrected
    normal p-value."""
    xa, ya = _as_array(x, "x"), _as_array(y, "y")
    nx, ny = xa.size, ya.size
    ranks = rankdata(np.concatenate([xa, ya]))
    u = float(ranks[:nx].sum()) - nx * (nx + 1) / 2.0

    n = nx + ny
    _, tie_counts = np.unique(np.concatenate([xa, ya]), return_counts=True)
    tie_term = float(((tie_counts**3 - tie_counts).sum()))
    var = nx * ny / 12.0 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    mean = nx * ny / 2.0
    if var <= 0:
        return u, 1.0
    shift = u - mean
    z = (shift - 0.5 * np.sign(shift)) / math.sqrt(var)
    if two_sided:
        p = 2.0 * float(norm.sf(abs(z)))
    else:
        p = float(norm.sf(z))
    return u, min(p, 1.0)


def _signed_rank_counts(ranks: Sequence[int]) -> np.ndarray:
    """Number of rank subsets achieving each possible sum."""
    total = int(sum(ranks))
    counts = np.zeros(total + 1, dtype=float)
    counts[0] = 1.0
    for r in ranks:
        counts[r:] = counts[r:] + counts[: total + 1 - r]
    return counts


def wilcoxon_signed_rank(pairs: Sequence[tuple[float, float]],
                         two_sided: bool = True) -> tuple[float, float]:
    """Paired Wilcoxon signed-rank test, W = min(W+, W-).

    Zero differences are dropped. The p-value is exact (full sign enumeration
    by dynamic programming) for n <= 25 without ties, otherwise a
    tie-corrected normal approximation.
    """
    diffs = np.array([a - b for a, b in pairs], dtype=float)
    diffs = diffs[diffs != 0.0]
    n = diffs.size
    if n == 0:
        raise InputError("all differences are zero")
    ranks = rankdata(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())
    w_minus = float(ranks[diffs < 0].sum())
    w = min(w_plus, w_minus)

    no_ties = np.unique(np.abs(diffs)).size == n
    if no_ties and n <= WILCOXON_EXACT_MAX_N:
        counts = _signed_rank_counts([int(r) for r in ranks])
        total = n * (n + 1) // 2
        denom = 2.0**n
        if two_sided:
            w_int = int(round(w))
            lo = counts[: w_int + 1].sum()
            hi_start = max(total - w_int, w_int + 1)
            p = (lo + counts[hi_start:].sum()) / denom
        else:  # alternative: a shifted above b, i.e. small W-
            p = counts[: int(round(w_minus)) + 1].sum() / denom
        return w, min(p, 1.0)

    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(np.abs(diffs), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float((tie_counts**3 - tie_counts).sum()) / 48.0
    if var <= 0:
        return w, 1.0
    if two_sided:
        p = 2.0 * float(norm.sf(abs((w - mean) / math.sqrt(var))))
    else:
        p = float(norm.cdf((w_minus - mean) / math.sqrt(var)))
    return w, min(p, 1.0)


def bonferroni(p_values: Sequence[float], m: int | None = None) -> list[float]:
    """Bonferroni adjustment: min(1, p * m), m defaulting to the list length."""
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise InputError(f"p-value {p} outside [0, 1]")
    m = len(p_values) if m is None else m
    return [min(1.0, p * m) for p in p_values]


@dataclass(frozen=True)
class RankTable:
    """N datasets x k models of real-valued performance (higher = better)."""

    models: tuple[str, ...]
    datasets: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "datasets", tuple(self.datasets))
        if values.shape != (len(self.datasets), len(self.models)):
            raise InputError("values must be shaped (datasets, models)")
        if len(self.models) < 2 or len(self.datasets) < 2:
            raise InputError("need at least 2 models and 2 datasets")
        if not np.isfinite(values).all():
            raise InputError("rank table has missing or non-finite cells")

    @classmethod
    def from_csv(cls, path: str | Path) -> "RankTable":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 3 or len(rows[0]) < 3:
            raise InputError(f"{path}: need a header row plus >= 2 datasets and models")
        models = tuple(rows[0][1:])
        datasets = tuple(r[0] for r in rows[1:])
        values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
        return cls(models, datasets, values)

    def to_csv(self, dest: str | Path) -> None:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["dataset", *self.models])
            for name, row in zip(self.datasets, self.values):
                writer.writerow([name, *(repr(float(v)) for v in row)])


def friedman(table: RankTable) -> tuple[float, float]:
    """Friedman chi-square over per-dataset midranks (no tie-correction factor)."""
    n, k = table.values.shape
    ranks = np.apply_along_axis(rankdata, 1, table.values)
    rank_sums = ranks.sum(axis=0)
    stat = 12.0 / (n * k * (k + 1)) * float((rank_sums**2).sum()) - 3.0 * n * (k + 1)
    p = float(chi2.sf(stat, k - 1))
    return stat, p


@dataclass(frozen=True)
class NemenyiResult:
    critical_difference: float
    average_ranks: dict[str, float]
    significant_pairs: tuple[tuple[str, str], ...]


def nemenyi(table: RankTable, alpha: float = 0.05) -> NemenyiResult:
    """Nemenyi post-hoc test: pairs whose average-rank gap exceeds the
    critical difference q_alpha * sqrt(k(k+1)/(6N)) differ significantly.

    Ranks are assigned per dataset with 1 = best (highest value).
    """
    if alpha not in NEMENYI_Q:
        raise InputError(f"alpha must be one of {sorted(NEMENYI_Q)}")
    n, k = table.values.shape
    if not 2 <= k <= 20:
        raise InputError(f"bundled critical values cover 2..20 models, got {k}")
    ranks = np.apply_along_axis(rankdata, 1, -table.values)
    avg = ranks.mean(axis=0)
    cd = NEMENYI_Q[alpha][k - 2] * math.sqrt(k * (k + 1) / (6.0 * n))
    pairs = [
        (table.models[i], table.models[j])
        for i in range(k)
        for j in range(i + 1, k)
        if abs(avg[i] - avg[j]) > cd
    ]
    return NemenyiResult(cd, dict(zip(table.models, avg.tolist())), tuple(pairs))


def _corr_pvalue(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return 2.0 * float(t_dist.sf(abs(t), n - 2))


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Product-moment correlation with a t-distribution p-value."""
    xa, ya = _as_array(x, "x"), _as_array(y, "y")
    if xa.size != ya.size or xa.size < 3:
        raise InputError("need equal-length samples of size >= 3")
    if np.ptp(xa) == 0 or np.ptp(ya) == 0:
        raise InputError("correlation is undefined for constant input")
    xc, yc = xa - xa.mean(), ya - ya.mean()
    r = float((xc * yc).sum() / math.sqrt((xc**2).sum() * (yc**2).sum()))
    r = max(-1.0, min(1.0, r))
    return r, _corr_pvalue(r, xa.size)


def spearman(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Rank correlation: Pearson applied to midranks."""
    xa, ya = _as_array(x, "x"), _as_array(y, "y")
    if xa.size != ya.size or xa.size < 3:
        raise InputError("need equal-length samples of size >= 3")
    if np.ptp(xa) == 0 or np.ptp(ya) == 0:
        raise InputError("correlation is undefined for constant input")
    return pearson(rankdata(xa), rankdata(ya))
