"""Renewal (exploration) and refinement (exploitation) diagnostics.

Both metrics are normalized Hamming averages over a population of ``mu``
``n``-bit individuals, so they always lie in [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np


def _as_matrix(pop) -> np.ndarray:
    arr = np.asarray(pop)
    if arr.ndim != 2:
        raise ValueError(f"expected a (mu, n) population, got shape {arr.shape}")
    return arr


def renewal_metric(pop, trials) -> float:
    """Mean fraction of bits changed between each individual and its trial."""
    pop = _as_matrix(pop)
    trials = _as_matrix(trials)
    if pop.shape != trials.shape:
        raise ValueError(f"shape mismatch: population {pop.shape} vs trials {trials.shape}")
    return float(np.count_nonzero(pop != trials)) / pop.size


def refinement_metric(pop, gbest) -> float:
    """Mean fraction of bits each individual shares with ``gbest``.

    ``gbest`` is the best solution explored before the generation started,
    not the best member of the current population.
    """
    pop = _as_matrix(pop)
    gbest = np.asarray(gbest)
    if gbest.shape != (pop.shape[1],):
        raise ValueError(f"gbest length {gbest.shape} does not match n={pop.shape[1]}")
    return float(np.count_nonzero(pop == gbest)) / pop.size


@dataclass
class MetricSeries:
    alpha: List[float] = field(default_factory=list)
    beta: List[float] = field(default_factory=list)

    def append(self, alpha: float, beta: float) -> None:
        self.alpha.append(alpha)
        self.beta.append(beta)

    def __len__(self) -> int:
        return len(self.alpha)
