"""Binary learning differential evolution and a random-search baseline.

One BLDE generation sweeps the population in order.  For every individual
``w`` it draws ``x`` and ``y`` from the population and ``z`` from the
archive (the previous population), seeds the trial with the fitter of ``y``
and ``z``, and then, on bits where ``y`` and ``z`` agree, either copies the
population best (when ``x`` disagrees with it) or re-draws the bit with
probability ``p``.  ``w`` is replaced in place when the trial is not worse.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np

from .core import (
    BitString,
    BudgetExhausted,
    PopulationState,
    Problem,
    RngStream,
    default_budget,
    is_success,
    make_rng,
    random_population,
)
from .metrics import MetricSeries, refinement_metric, renewal_metric


def default_p(n: int) -> float:
    """Mutation probability max(0.05, min(0.15, 10/n))."""
    if n < 1:
        raise ValueError("n must be positive")
    return max(0.05, min(0.15, 10.0 / n))


@dataclass
class BldeConfig:
    mu: int = 50
    p: Optional[float] = None          # None -> default_p(n)
    max_fe: Optional[int] = None       # None -> 300 * n (* m for MKP)
    seed: int = 0
    archive_snapshot: str = "pre"      # "pre" | "post"
    charge_archive_init: bool = False
    stop_at_optimum: bool = False
    record_traces: bool = False

    def resolved(self, problem: Problem) -> "BldeConfig":
        cfg = replace(
            self,
            p=default_p(problem.n_bits) if self.p is None else self.p,
            max_fe=default_budget(problem) if self.max_fe is None else self.max_fe,
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.mu < 3:
            raise ValueError(f"mu must be >= 3, got {self.mu}")
        if self.p is not None and not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if self.max_fe is not None and self.max_fe < 1:
            raise ValueError("max_fe must be positive")
        if self.archive_snapshot not in ("pre", "post"):
            raise ValueError("archive_snapshot must be 'pre' or 'post'")


@dataclass
class GenerationTrace:
    trials: np.ndarray
    accepted: np.ndarray
    gbest_before: BitString
    alpha: float
    beta: float


@dataclass
class RunResult:
    algorithm: str
    problem: str
    seed: int
    best_bits: BitString
    best_fitness: float
    fe_used: int
    wall_time: float
    generations: int
    success: bool
    metrics: MetricSeries = field(default_factory=MetricSeries)
    best_history: List[float] = field(default_factory=list)
    traces: List[GenerationTrace] = field(default_factory=list, repr=False)


def _trial(x, y, z, gbest, y_wins, mutate, random_bits) -> BitString:
    """Trial construction with the random draws supplied by the caller."""
    base = y if y_wins else z
    agree = y == z
    learn = agree & (gbest != x)
    tx = np.where(learn, gbest, base)
    np.copyto(tx, random_bits, where=agree & ~learn & mutate)
    return tx


def make_trial(x: BitString, y: BitString, z: BitString, gbest: BitString,
               fy: float, fz: float, p: float, rng: RngStream) -> BitString:
    """Build one BLDE trial solution.

    The trial starts as the fitter of ``y`` and ``z`` (``y`` wins ties).
    Where ``y`` and ``z`` agree, a bit learns from ``gbest`` if ``x``
    disagrees with it there; otherwise it is redrawn uniformly with
    probability ``p``.  Bits where ``y`` and ``z`` differ are never touched.
    """
    n = len(x)
    if not (len(y) == len(z) == len(gbest) == n):
        raise ValueError("x, y, z and gbest must have equal length")
    mutate = rng.random(n) <= p
    random_bits = rng.integers(0, 2, size=n, dtype=np.uint8)
    return _trial(np.asarray(x), np.asarray(y), np.asarray(z), np.asarray(gbest),
                  fy >= fz, mutate, random_bits)


def init_state(problem: Problem, cfg: BldeConfig, rng: RngStream) -> PopulationState:
    """Random population and archive, both evaluated.

    Only the population's evaluations are charged unless
    ``cfg.charge_archive_init`` is set.
    """
    mu, n = cfg.mu, problem.n_bits
    pop = random_population(mu, n, rng)
    archive = random_population(mu, n, rng)
    fit = np.array([problem.fitness(b, rng) for b in pop])
    afit = np.array([problem.fitness(b, rng) for b in archive])
    fe = mu * (2 if cfg.charge_archive_init else 1)
    if cfg.max_fe is not None and fe > cfg.max_fe:
        raise ValueError(f"budget {cfg.max_fe} cannot cover the initial population ({fe} FEs)")
    g = int(np.argmax(fit))
    everything = np.concatenate([fit, afit])
    b = int(np.argmax(everything))
    best = pop[b] if b < mu else archive[b - mu]
    return PopulationState(
        population=pop, archive=archive, fitness=fit, archive_fitness=afit,
        gbest=pop[g].copy(), gbest_fitness=float(fit[g]),
        best_ever=best.copy(), best_ever_fitness=float(everything[b]),
        generation=0, fe_count=fe,
    )


def blde_generation(state: PopulationState, problem: Problem, cfg: BldeConfig,
                    rng: RngStream) -> tuple[PopulationState, GenerationTrace]:
    """Advance ``state`` by one generation, in place.

    Raises :class:`BudgetExhausted` (leaving ``state`` untouched) when the
    remaining budget cannot pay for a whole generation.
    """
    mu, n = state.mu, state.n
    if cfg.max_fe is not None and state.fe_count + mu > cfg.max_fe:
        raise BudgetExhausted(
            f"{cfg.max_fe - state.fe_count} FEs left, generation needs {mu}")
    p = default_p(n) if cfg.p is None else cfg.p

    X, fX = state.population, state.fitness
    A, fA = state.archive, state.archive_fitness
    g = int(np.argmax(fX))
    gbest = X[g].copy()
    state.gbest, state.gbest_fitness = gbest, float(fX[g])

    start, fstart = X.copy(), fX.copy()
    best_before = state.best_ever.copy()

    ix = rng.integers(0, mu, size=mu)
    iy = rng.integers(0, mu, size=mu)
    iz = rng.integers(0, mu, size=mu)
    mutate = rng.random((mu, n)) <= p
    random_bits = rng.integers(0, 2, size=(mu, n), dtype=np.uint8)

    trials = np.empty_like(X)
    accepted = np.zeros(mu, dtype=bool)
    for i in range(mu):
        y, z = X[iy[i]], A[iz[i]]
        tx = _trial(X[ix[i]], y, z, gbest, fX[iy[i]] >= fA[iz[i]],
                    mutate[i], random_bits[i])
        ft = problem.fitness(tx, rng)
        state.fe_count += 1
        trials[i] = tx
        if ft > state.best_ever_fitness:
            state.best_ever, state.best_ever_fitness = tx.copy(), ft
        if ft >= fX[i]:
            X[i] = tx
            fX[i] = ft
            accepted[i] = True

    if cfg.archive_snapshot == "pre":
        state.archive, state.archive_fitness = start, fstart
    else:
        state.archive, state.archive_fitness = X.copy(), fX.copy()
    state.generation += 1

    trace = GenerationTrace(
        trials=trials, accepted=accepted, gbest_before=gbest,
        alpha=renewal_metric(start, trials),
        beta=refinement_metric(start, best_before),
    )
    return state, trace


def blde_run(problem: Problem, cfg: BldeConfig) -> RunResult:
    cfg = cfg.resolved(problem)
    rng = make_rng(cfg.seed)
    t0 = time.perf_counter()
    state = init_state(problem, cfg, rng)
    metrics = MetricSeries()
    history = [state.best_ever_fitness]
    traces: List[GenerationTrace] = []
    while state.fe_count + state.mu <= cfg.max_fe:
        if cfg.stop_at_optimum and is_success(problem, state.best_ever_fitness):
            break
        state, trace = blde_generation(state, problem, cfg, rng)
        metrics.append(trace.alpha, trace.beta)
        history.append(state.best_ever_fitness)
        if cfg.record_traces:
            traces.append(trace)
    wall = time.perf_counter() - t0
    return RunResult(
        algorithm="blde", problem=problem.name, seed=cfg.seed,
        best_bits=state.best_ever.copy(), best_fitness=float(state.best_ever_fitness),
        fe_used=state.fe_count, wall_time=wall, generations=state.generation,
        success=is_success(problem, state.best_ever_fitness),
        metrics=metrics, best_history=history, traces=traces,
    )


def random_search(problem: Problem, cfg: BldeConfig) -> RunResult:
    """Uniform sampling baseline, spending the same budget in blocks of ``mu``."""
    cfg = cfg.resolved(problem)
    rng = make_rng(cfg.seed)
    t0 = time.perf_counter()
    best_bits, best = None, -np.inf
    history = []
    fe = 0
    while fe + cfg.mu <= cfg.max_fe:
        for bits in random_population(cfg.mu, problem.n_bits, rng):
            f = problem.fitness(bits, rng)
            fe += 1
            if f > best:
                best_bits, best = bits.copy(), f
        history.append(best)
        if cfg.stop_at_optimum and is_success(problem, best):
            break
    wall = time.perf_counter() - t0
    return RunResult(
        algorithm="random", problem=problem.name, seed=cfg.seed,
        best_bits=best_bits, best_fitness=float(best), fe_used=fe, wall_time=wall,
        generations=len(history), success=is_success(problem, best),
        best_history=history,
    )


Algorithm = Callable[[Problem, BldeConfig], RunResult]

ALGORITHMS: Dict[str, Algorithm] = {
    "blde": blde_run,
    "random": random_search,
}
