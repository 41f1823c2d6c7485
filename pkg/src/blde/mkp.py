"""Multidimensional knapsack instances with penalized fitness.

Instance files are whitespace-separated numbers laid out as::

    n m [known_optimum]
    p_1 ... p_n
    w_11 ... w_1n
    ...
    w_m1 ... w_mn
    W_1 ... W_m

The optimum is present exactly when the token count says so; a zero
optimum is treated as unknown.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from .core import BitString, RngStream

BRUTEFORCE_MAX_N = 24


class MkpParseError(ValueError):
    pass


@dataclass(frozen=True)
class MkpInstance:
    profits: np.ndarray
    weights: np.ndarray     # (m, n)
    capacities: np.ndarray
    known_opt: Optional[float] = None
    name: str = "mkp"

    def __post_init__(self):
        m, n = self.weights.shape
        if self.profits.shape != (n,) or self.capacities.shape != (m,):
            raise ValueError("profits, weights and capacities have inconsistent shapes")
        if not np.any(self.weights > 0):
            raise ValueError("weight matrix has no positive entry")

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def penalty_factor(self) -> float:
        # Zero weights occur in published instances; only positive ones bound
        # how far an item can move a constraint.
        return (1.0 + float(self.profits.max())) / float(self.weights[self.weights > 0].min())


def _number(tok: str) -> float:
    v = float(tok)
    return int(v) if v.is_integer() else v


def parse_mkp(text: str, name: str = "mkp") -> MkpInstance:
    tokens = text.split()
    pos = 0

    def take(count: int, section: str):
        nonlocal pos
        if pos + count > len(tokens):
            raise MkpParseError(
                f"{name}: expected {count} value(s) for {section} at token {pos}, "
                f"only {len(tokens) - pos} left")
        try:
            chunk = [_number(t) for t in tokens[pos:pos + count]]
        except ValueError as exc:
            raise MkpParseError(f"{name}: non-numeric token in {section}: {exc}") from None
        pos += count
        return chunk

    n, m = take(2, "header (n m)")
    if not (isinstance(n, int) and isinstance(m, int)) or n < 1 or m < 1:
        raise MkpParseError(f"{name}: header must hold positive integers n and m, got {n} {m}")
    body = n + m * n + m
    rest = len(tokens) - 2
    if rest > body + 1:
        raise MkpParseError(
            f"{name}: {rest} tokens after the header, expected {body} or {body + 1} "
            f"for n={n}, m={m}")
    opt = take(1, "known optimum")[0] if rest == body + 1 else None
    profits = np.array(take(n, "profits"), dtype=float)
    weights = np.array(take(m * n, f"weights ({m}x{n})"), dtype=float).reshape(m, n)
    caps = np.array(take(m, "capacities"), dtype=float)
    return MkpInstance(profits, weights, caps, known_opt=opt or None, name=name)


def load_mkp(path: Union[str, Path]) -> MkpInstance:
    path = Path(path)
    return parse_mkp(path.read_text(), name=path.stem)


def format_mkp(inst: MkpInstance) -> str:
    def row(values):
        return " ".join(f"{v:g}" for v in values)

    lines = [f"{inst.n} {inst.m} {inst.known_opt or 0:g}", row(inst.profits)]
    lines += [row(r) for r in inst.weights]
    lines.append(row(inst.capacities))
    return "\n".join(lines) + "\n"


def violations(inst: MkpInstance, bits: BitString) -> np.ndarray:
    """Per-constraint load minus capacity (positive means violated)."""
    return inst.weights @ np.asarray(bits, dtype=float) - inst.capacities


def pt_penalty(inst: MkpInstance, bits: BitString, literal: bool = False) -> float:
    """Penalty factor times the largest constraint violation.

    ``literal=True`` uses the per-item reading max_j(w_ij x_j - W_i) of the
    inner maximum instead of the constraint-sum violation.
    """
    bits = np.asarray(bits)
    if bits.shape != (inst.n,):
        raise ValueError(f"expected {inst.n} bits, got {bits.shape}")
    if literal:
        v = (inst.weights * bits - inst.capacities[:, None]).max(axis=1)
    else:
        v = violations(inst, bits)
    return inst.penalty_factor * max(float(v.max()), 0.0)


def mkp_fitness(inst: MkpInstance, bits: BitString, literal: bool = False) -> float:
    return float(inst.profits @ np.asarray(bits, dtype=float)) - pt_penalty(inst, bits, literal)


def is_feasible(inst: MkpInstance, bits: BitString) -> bool:
    return bool(np.all(violations(inst, bits) <= 0))


def _all_bitstrings(n: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8)


def mkp_bruteforce(inst: MkpInstance) -> Tuple[BitString, float]:
    """Exact feasible optimum by enumeration (n <= 24).

    Ties go to the lexicographically smallest selection.
    """
    if inst.n > BRUTEFORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTEFORCE_MAX_N}, got {inst.n}")
    best_bits = np.zeros(inst.n, dtype=np.uint8)
    best = 0.0
    chunk = 1 << min(inst.n, 16)
    high_bits = inst.n - min(inst.n, 16)
    low = _all_bitstrings(inst.n - high_bits)
    for hi in itertools.product((0, 1), repeat=high_bits):
        block = np.hstack([np.tile(np.array(hi, dtype=np.uint8), (chunk, 1)), low])
        feasible = np.all(block @ inst.weights.T <= inst.capacities, axis=1)
        profit = np.where(feasible, block @ inst.profits, -np.inf)
        k = int(np.argmax(profit))
        if profit[k] > best:
            best, best_bits = float(profit[k]), block[k].copy()
    return best_bits, best


def penalized_argmax(inst: MkpInstance, literal: bool = False) -> Tuple[BitString, float]:
    """Exhaustive argmax of the penalized fitness (small n only)."""
    if inst.n > BRUTEFORCE_MAX_N:
        raise ValueError(f"enumeration limited to n <= {BRUTEFORCE_MAX_N}")
    allb = _all_bitstrings(inst.n)
    vals = np.array([mkp_fitness(inst, b, literal) for b in allb])
    k = int(np.argmax(vals))
    return allb[k], float(vals[k])


def random_instance(n: int, m: int, rng: RngStream, tightness: float = 0.5) -> MkpInstance:
    """Integer profits and weights in 1..100, capacities at ``tightness`` of row sums."""
    profits = rng.integers(1, 101, size=n).astype(float)
    weights = rng.integers(1, 101, size=(m, n)).astype(float)
    caps = np.floor(tightness * weights.sum(axis=1))
    return MkpInstance(profits, weights, caps, name=f"random_n{n}_m{m}")


@dataclass
class MkpProblem:
    """An MKP instance exposed through the maximization problem interface."""

    instance: MkpInstance
    literal_penalty: bool = False
    success_tol: float = 0.0
    deterministic: bool = True

    @property
    def name(self) -> str:
        return self.instance.name

    @property
    def n_bits(self) -> int:
        return self.instance.n

    @property
    def fe_multiplier(self) -> int:
        return self.instance.m

    @property
    def known_max(self) -> Optional[float]:
        return self.instance.known_opt

    def fitness(self, bits: BitString, rng: Optional[RngStream] = None) -> float:
        inst = self.instance
        load = inst.weights @ bits
        if not self.literal_penalty and np.all(load <= inst.capacities):
            return float(inst.profits @ bits)
        return mkp_fitness(inst, bits, self.literal_penalty)
