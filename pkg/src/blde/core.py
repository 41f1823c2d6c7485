"""Bitstring genotypes, seeded randomness, population bookkeeping and budgets.

Bitstrings are plain ``numpy.uint8`` vectors holding 0/1.  Every stochastic
routine takes an explicit ``numpy.random.Generator`` (see :func:`make_rng`);
nothing in the package touches a global random source.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Protocol

import numpy as np

BitString = np.ndarray
RngStream = np.random.Generator


def make_rng(seed: int) -> RngStream:
    """Return a reproducible random stream for ``seed``."""
    return np.random.default_rng(seed)


def as_bits(bits, n: Optional[int] = None) -> BitString:
    """Coerce a sequence or string of 0/1 values into a uint8 vector."""
    if isinstance(bits, str):
        bits = [int(ch) for ch in bits]
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError(f"bitstring must be 1-D, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("bitstring entries must be 0 or 1")
    if n is not None and arr.size != n:
        raise ValueError(f"expected {n} bits, got {arr.size}")
    return arr.astype(np.uint8, copy=False)


def bits_to_str(bits: BitString) -> str:
    return "".join("1" if b else "0" for b in bits)


def hamming(a: BitString, b: BitString) -> int:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def random_population(mu: int, n: int, rng: RngStream) -> np.ndarray:
    """Draw ``mu`` uniform random bitstrings of length ``n`` as a (mu, n) array."""
    if mu < 1 or n < 1:
        raise ValueError("mu and n must be positive")
    return rng.integers(0, 2, size=(mu, n), dtype=np.uint8)


class Problem(Protocol):
    """Maximization problem over {0,1}^n_bits.

    ``fitness`` receives the run's random stream so noisy problems stay
    reproducible; deterministic problems ignore it.
    """

    name: str
    n_bits: int
    known_max: Optional[float]
    success_tol: float
    deterministic: bool

    def fitness(self, bits: BitString, rng: Optional[RngStream] = None) -> float: ...


@dataclass
class FunctionProblem:
    """A :class:`Problem` built from a plain callable."""

    name: str
    n_bits: int
    func: Callable[..., float]
    known_max: Optional[float] = None
    success_tol: float = 0.0
    deterministic: bool = True
    fe_multiplier: int = 1  # budget is 300 * n * fe_multiplier (m for MKP)

    def fitness(self, bits: BitString, rng: Optional[RngStream] = None) -> float:
        if self.deterministic:
            return float(self.func(bits))
        return float(self.func(bits, rng))


def is_success(problem: Problem, value: float) -> bool:
    if problem.known_max is None:
        return False
    return abs(value - problem.known_max) <= problem.success_tol + 1e-12


def default_budget(problem: Problem, multiplier: int = 300) -> int:
    """300*n FEs, or 300*n*m for knapsack instances."""
    return multiplier * problem.n_bits * getattr(problem, "fe_multiplier", 1)


@dataclass
class PopulationState:
    population: np.ndarray
    archive: np.ndarray
    fitness: np.ndarray
    archive_fitness: np.ndarray
    gbest: BitString
    gbest_fitness: float
    best_ever: BitString
    best_ever_fitness: float
    generation: int = 0
    fe_count: int = 0

    @property
    def mu(self) -> int:
        return self.population.shape[0]

    @property
    def n(self) -> int:
        return self.population.shape[1]

    def copy(self) -> "PopulationState":
        return PopulationState(
            population=self.population.copy(),
            archive=self.archive.copy(),
            fitness=self.fitness.copy(),
            archive_fitness=self.archive_fitness.copy(),
            gbest=self.gbest.copy(),
            gbest_fitness=self.gbest_fitness,
            best_ever=self.best_ever.copy(),
            best_ever_fitness=self.best_ever_fitness,
            generation=self.generation,
            fe_count=self.fe_count,
        )


class BudgetExhausted(RuntimeError):
    """Raised when a full generation no longer fits in the FE budget."""


def evaluate(problem: Problem, bits: BitString, state: PopulationState,
             rng: Optional[RngStream] = None) -> float:
    """Evaluate ``bits`` and charge one FE to ``state``."""
    if len(bits) != problem.n_bits:
        raise ValueError(f"{problem.name} expects {problem.n_bits} bits, got {len(bits)}")
    value = problem.fitness(bits, rng)
    state.fe_count += 1
    return value
