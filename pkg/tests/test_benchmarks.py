from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blde.benchmarks import (
    CONTINUOUS, decode, eval_continuous, f1_leading, f2_root2path, make_problem,
    root2path_length, root2path_path, root2path_position,
)
from blde.core import as_bits, make_rng


def test_leading_ones():
    assert f1_leading(np.ones(30, dtype=np.uint8)) == 30
    assert f1_leading(np.zeros(30, dtype=np.uint8)) == 0
    assert f1_leading(as_bits("1101111")) == 2


def _independent_path(n):
    """Path rebuilt from the L(n+2) = 2L(n)+1 recursion with ints, not strings."""
    if n == 1:
        return [(0,), (1,)]
    inner = _independent_path(n - 2)
    return ([(0, 0) + s for s in inner] + [(0, 1) + inner[-1]]
            + [(1, 1) + s for s in inner[::-1]])


@pytest.mark.parametrize("n", [1, 3, 5, 7, 9])
def test_root2path_structure(n):
    path = root2path_path(n)
    assert [tuple(map(int, s)) for s in path] == _independent_path(n)
    assert len(path) == len(set(path)) == root2path_length(n)
    for a, b in zip(path, path[1:]):
        assert sum(x != y for x, y in zip(a, b)) == 1


@pytest.mark.parametrize("n", [5, 7, 9])
def test_root2path_exhaustive_fitness(n):
    on_path = {s: k for k, s in enumerate(root2path_path(n), start=1)}
    best = 0
    for bits in product((0, 1), repeat=n):
        s = "".join(map(str, bits))
        f = f2_root2path(np.array(bits, dtype=np.uint8))
        if s in on_path:
            assert f == n * n + on_path[s]
        else:
            assert f == bits.count(0) < n * n
        best = max(best, f)
    assert best == root2path_length(n) + n * n


def test_root2path_n29_maximum():
    assert root2path_length(29) == 49151
    end = as_bits("11" + "0" * 27)
    start = np.zeros(29, dtype=np.uint8)
    assert root2path_position(end) == 49151
    assert f2_root2path(end) == 49992
    assert f2_root2path(start) < f2_root2path(end)
    assert make_problem("P2").known_max == 49992


def test_root2path_rejects_even_length():
    with pytest.raises(ValueError):
        f2_root2path(np.zeros(4, dtype=np.uint8))


def test_decode_endpoints_and_exact_value():
    assert decode(np.zeros(6, dtype=np.uint8), 6, -10, 10)[0] == -10
    assert decode(np.ones(6, dtype=np.uint8), 6, -10, 10)[0] == 10
    bits = np.array([int(c) for c in format(43690, "016b")], dtype=np.uint8)
    assert Fraction(-300) + Fraction(43690 * 600, 65535) == 100
    assert decode(bits, 16, -300.0, 300.0)[0] == 100.0
    with pytest.raises(ValueError):
        decode(np.zeros(7, dtype=np.uint8), 3, 0, 1)


@given(st.integers(1, 16).flatmap(lambda k: st.tuples(st.just(k), st.integers(0, 2**k - 2))))
def test_decode_monotone(args):
    k, i = args
    enc = lambda v: np.array([int(c) for c in format(v, f"0{k}b")], dtype=np.uint8)
    assert decode(enc(i), k, -2.0, 3.0)[0] < decode(enc(i + 1), k, -2.0, 3.0)[0]


def test_continuous_optima():
    assert eval_continuous("P3", np.zeros(30)) == 0
    assert eval_continuous("P4", np.full(30, 100.0)) == pytest.approx(0, abs=1e-12)
    assert eval_continuous("P6", np.ones(30)) == 0
    assert eval_continuous("P7", np.zeros(30)) == pytest.approx(0, abs=1e-12)
    v = eval_continuous("P5", np.zeros(30), make_rng(0))
    assert -1 < v <= 0


def test_continuous_errors():
    with pytest.raises(ValueError):
        eval_continuous("P3", np.full(30, 11.0))
    with pytest.raises(ValueError):
        eval_continuous("P5", np.zeros(30))


@pytest.mark.parametrize("pid", ["P4", "P6", "P7"])
def test_nonpositive_by_sampling(pid):
    spec = CONTINUOUS[pid]
    rng = make_rng(5)
    xs = spec.lower + rng.random((2000, 30)) * (spec.upper - spec.lower)
    assert max(eval_continuous(pid, x) for x in xs) <= 0


def test_p6_grid_excludes_optimum():
    k, lo, hi = 10, -2.048, 2.048
    grid = lo + np.arange(2**k) * (hi - lo) / (2**k - 1)
    assert not np.any(grid == 1.0)
    nearest = grid[np.argmin(np.abs(grid - 1.0))]
    # every summand is minimized jointly at a constant vector near 1
    consts = grid[np.abs(grid - 1.0) < 0.05]
    best = max(eval_continuous("P6", np.full(30, c)) for c in consts)
    assert best < 0 and eval_continuous("P6", np.full(30, nearest)) < 0


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["P3", "P4", "P6", "P7"]), st.integers(0, 2**32 - 1))
def test_problem_fitness_matches_decode(pid, seed):
    prob = make_problem(pid)
    bits = make_rng(seed).integers(0, 2, prob.n_bits, dtype=np.uint8)
    assert prob.fitness(bits) == eval_continuous(pid, prob.decode(bits))
    assert prob.fitness(bits) <= 0


def test_registry():
    sizes = {"P1": 30, "P2": 29, "P3": 180, "P4": 480, "P5": 240, "P6": 300, "P7": 300}
    for name, n in sizes.items():
        assert make_problem(name).n_bits == n
    with pytest.raises(KeyError):
        make_problem("P9")
