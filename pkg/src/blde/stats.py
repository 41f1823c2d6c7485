"""Multi-run summaries and the Wilcoxon rank-sum comparison."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

SUPERIOR = "superior"
INFERIOR = "inferior"
NO_DIFFERENCE = "no_difference"

SYMBOLS = {SUPERIOR: "+", INFERIOR: "-", NO_DIFFERENCE: "≈"}

# Below this many observations in either sample the exact null is enumerated.
EXACT_BELOW = 10


@dataclass
class RunBatch:
    best_fitness: Sequence[float]
    wall_times: Sequence[float]
    success_flags: Sequence[bool]

    def __post_init__(self):
        n = len(self.best_fitness)
        if n < 1:
            raise ValueError("a run batch needs at least one run")
        if len(self.wall_times) != n or len(self.success_flags) != n:
            raise ValueError("best_fitness, wall_times and success_flags differ in length")


@dataclass
class Summary:
    ave_fit: float
    std_dev: float
    sr_percent: float
    mean_runtime: float
    runs: int


def summarize(batch: RunBatch) -> Summary:
    """AveFit, sample StdDev (N-1 divisor), SR in percent and mean wall time."""
    f = np.asarray(batch.best_fitness, dtype=float)
    std = float(np.std(f, ddof=1)) if f.size > 1 else 0.0
    return Summary(
        ave_fit=float(np.mean(f)),
        std_dev=std,
        sr_percent=100.0 * sum(bool(s) for s in batch.success_flags) / f.size,
        mean_runtime=float(np.mean(batch.wall_times)),
        runs=int(f.size),
    )


@dataclass
class RankSumResult:
    verdict: str
    p_value: float
    u_statistic: float
    rank_sum: float
    method: str

    @property
    def symbol(self) -> str:
        return SYMBOLS[self.verdict]


def _exact_p(ranks: np.ndarray, n1: int, observed: float) -> float:
    """Two-sided p-value from the exact null distribution of the rank sum.

    Counts the n1-subsets of the pooled (doubled, hence integer) midranks by
    their sum, which is equivalent to enumerating every split.
    """
    r2 = np.rint(2 * ranks).astype(np.int64)
    top = int(r2.sum())
    counts = np.zeros((n1 + 1, top + 1))
    counts[0, 0] = 1.0
    for r in r2:
        counts[1:, r:] += counts[:-1, :top + 1 - r].copy()
    dist = counts[n1]
    center = n1 * (ranks.size + 1)          # doubled
    dev = abs(2 * observed - center) - 1e-9
    sums = np.arange(top + 1)
    return float(dist[np.abs(sums - center) >= dev].sum() / dist.sum())


def _normal_p(ranks: np.ndarray, n1: int, n2: int, u: float) -> float:
    n = n1 + n2
    _, counts = np.unique(ranks, return_counts=True)
    tie = float(np.sum(counts ** 3 - counts))
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return 1.0
    z = max(abs(u - n1 * n2 / 2.0) - 0.5, 0.0) / math.sqrt(var)
    return math.erfc(z / math.sqrt(2.0))


def wilcoxon_ranksum(a: Sequence[float], b: Sequence[float], alpha: float = 0.05,
                     method: str = "auto") -> RankSumResult:
    """Two-sided rank-sum test of ``a`` against ``b`` (larger is better).

    ``method`` is "exact", "normal" or "auto" (exact when either sample has
    fewer than 10 observations).  Ties get midranks; the normal path uses the
    tie-corrected variance and a continuity correction.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = a.size, b.size
    if n1 < 2 or n2 < 2:
        raise ValueError("each sample needs at least two observations")
    ranks = rankdata(np.concatenate([a, b]))
    r1 = float(ranks[:n1].sum())
    u = r1 - n1 * (n1 + 1) / 2.0
    if method == "auto":
        method = "exact" if min(n1, n2) < EXACT_BELOW else "normal"
    if np.ptp(ranks) == 0:
        p = 1.0
    elif method == "exact":
        p = _exact_p(ranks, n1, r1)
    elif method == "normal":
        p = _normal_p(ranks, n1, n2, u)
    else:
        raise ValueError(f"unknown method {method!r}")
    if p < alpha:
        verdict = SUPERIOR if u > n1 * n2 / 2.0 else INFERIOR
    else:
        verdict = NO_DIFFERENCE
    return RankSumResult(verdict=verdict, p_value=p, u_statistic=u, rank_sum=r1, method=method)
