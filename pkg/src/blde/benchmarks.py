"""Benchmark problems P1-P7.

P1 counts leading ones, P2 is the Root2path long-path problem, and P3-P7 are
continuous functions whose variables are encoded as plain binary, most
significant bit first.  All problems are posed as maximization with a known
maximum of 0 for the continuous ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional

import numpy as np

from .core import BitString, FunctionProblem, RngStream


# --- P1 ---------------------------------------------------------------------

def f1_leading(bits: BitString) -> int:
    """Sum of prefix products, i.e. the number of leading ones."""
    bits = np.asarray(bits)
    zeros = np.flatnonzero(bits == 0)
    return int(zeros[0]) if zeros.size else int(bits.size)


# --- P2: Root2path ----------------------------------------------------------
#
# P(1) = [0, 1].  P(n+2) = [00+s for s in P(n)] + [01+last(P(n))]
#                          + [11+s for s in reversed(P(n))]
# so L(n+2) = 2 L(n) + 1 and consecutive path members differ in one bit.

def root2path_length(n: int) -> int:
    if n < 1 or n % 2 == 0:
        raise ValueError(f"Root2path needs an odd bit length, got {n}")
    return 3 * 2 ** ((n - 1) // 2) - 1


def root2path_path(n: int) -> List[str]:
    """Explicit path for odd ``n`` (exponential size, meant for small n)."""
    root2path_length(n)
    path = ["0", "1"]
    for _ in range((n - 1) // 2):
        path = (["00" + s for s in path] + ["01" + path[-1]]
                + ["11" + s for s in reversed(path)])
    return path


@lru_cache(maxsize=None)
def _last(n: int) -> tuple:
    return (1,) if n == 1 else (1, 1) + (0,) * (n - 2)


def _position(s: tuple) -> int:
    n = len(s)
    if n == 1:
        return 1 if s[0] == 0 else 2
    L = root2path_length(n - 2)
    head, rest = s[:2], s[2:]
    if head == (0, 0):
        return _position(rest)
    if head == (1, 1):
        inner = _position(rest)
        return 2 * L + 2 - inner if inner else 0
    if head == (0, 1) and rest == _last(n - 2):
        return L + 1
    return 0


def root2path_position(bits) -> int:
    """1-based position of ``bits`` on the path, or 0 if off the path."""
    s = tuple(int(b) for b in bits)
    root2path_length(len(s))
    return _position(s)


def f2_root2path(bits: BitString) -> int:
    """Path members score n^2 + position; everything else scores its zero count."""
    n = len(bits)
    pos = root2path_position(bits)
    if pos:
        return n * n + pos
    return int(n - np.count_nonzero(bits))


# --- P3-P7 --------------------------------------------------------------------

def decode(bits: BitString, k: int, lo: float, hi: float) -> np.ndarray:
    """Map consecutive ``k``-bit groups linearly onto [lo, hi]."""
    bits = np.asarray(bits)
    if k < 1 or bits.size % k:
        raise ValueError(f"{bits.size} bits cannot be split into {k}-bit groups")
    # float weights are exact for k <= 53
    ints = bits.reshape(-1, k) @ _place_values(k)
    return lo + ints * (hi - lo) / (2 ** k - 1)


@lru_cache(maxsize=None)
def _place_values(k: int) -> np.ndarray:
    return 2.0 ** np.arange(k - 1, -1, -1)


@lru_cache(maxsize=None)
def _index(d: int) -> np.ndarray:
    return np.arange(1, d + 1, dtype=float)


@lru_cache(maxsize=None)
def _inv_sqrt_index(d: int) -> np.ndarray:
    return 1.0 / np.sqrt(_index(d))


def _f3(x, rng=None):
    return -float(np.max(np.abs(x)))


def _f4(x, rng=None):
    d = x - 100.0
    return float(-d.dot(d) / 4000.0 + np.cos(d * _inv_sqrt_index(x.size)).prod() - 1.0)


def _f5(x, rng=None):
    if rng is None:
        raise ValueError("P5 is noisy and needs a random stream")
    return float(-_index(x.size).dot(x ** 4) - rng.random())


def _f6(x, rng=None):
    a, b = x[:-1], x[1:]
    return float(-np.sum(100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2))


def _f7(x, rng=None):
    m = x.size
    return float(-20.0 + 20.0 * math.exp(-0.2 * math.sqrt(np.dot(x, x) / m))
                 + math.exp(np.sum(np.cos(2.0 * math.pi * x)) / m) - math.e)


@dataclass(frozen=True)
class ContinuousSpec:
    func: Callable
    lower: float
    upper: float
    dims: int
    bits_per_dim: int
    noisy: bool = False


CONTINUOUS: Dict[str, ContinuousSpec] = {
    "P3": ContinuousSpec(_f3, -10.0, 10.0, 30, 6),
    "P4": ContinuousSpec(_f4, -300.0, 300.0, 30, 16),
    "P5": ContinuousSpec(_f5, -1.28, 1.28, 30, 8, noisy=True),
    "P6": ContinuousSpec(_f6, -2.048, 2.048, 30, 10),
    "P7": ContinuousSpec(_f7, -30.0, 30.0, 30, 10),
}


def eval_continuous(problem_id: str, x, rng: Optional[RngStream] = None) -> float:
    spec = CONTINUOUS[problem_id]
    x = np.asarray(x, dtype=float)
    tol = 1e-12 * (spec.upper - spec.lower)
    if np.any(x < spec.lower - tol) or np.any(x > spec.upper + tol):
        raise ValueError(f"{problem_id} input outside [{spec.lower}, {spec.upper}]")
    return spec.func(x, rng)


@dataclass
class EncodedContinuousProblem:
    name: str
    dims: int
    bits_per_dim: int
    lower: float
    upper: float
    objective: Callable
    noisy: bool = False
    known_max: Optional[float] = 0.0
    success_tol: float = 1e-2

    @property
    def n_bits(self) -> int:
        return self.dims * self.bits_per_dim

    @property
    def deterministic(self) -> bool:
        return not self.noisy

    def decode(self, bits: BitString) -> np.ndarray:
        return decode(bits, self.bits_per_dim, self.lower, self.upper)

    def fitness(self, bits: BitString, rng: Optional[RngStream] = None) -> float:
        return self.objective(self.decode(bits), rng)


def make_problem(name: str, **overrides):
    """Build a registered benchmark: "P1".."P7".

    ``n`` overrides the bit length of P1/P2, ``dims``/``bits_per_dim``
    those of P3-P7, and ``success_tol`` the success threshold.
    """
    if name == "P1":
        n = overrides.get("n", 30)
        return FunctionProblem("P1", n, f1_leading, known_max=float(n),
                               success_tol=overrides.get("success_tol", 0.0))
    if name == "P2":
        n = overrides.get("n", 29)
        return FunctionProblem("P2", n, f2_root2path,
                               known_max=float(n * n + root2path_length(n)),
                               success_tol=overrides.get("success_tol", 0.0))
    if name in CONTINUOUS:
        spec = CONTINUOUS[name]
        return EncodedContinuousProblem(
            name=name,
            dims=overrides.get("dims", spec.dims),
            bits_per_dim=overrides.get("bits_per_dim", spec.bits_per_dim),
            lower=spec.lower, upper=spec.upper, objective=spec.func,
            noisy=spec.noisy, success_tol=overrides.get("success_tol", 1e-2),
        )
    raise KeyError(f"unknown problem {name!r}; expected one of {PROBLEM_NAMES}")


PROBLEM_NAMES = ("P1", "P2", "P3", "P4", "P5", "P6", "P7")
