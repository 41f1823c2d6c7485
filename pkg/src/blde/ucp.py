"""Unit commitment: production cost, constraints, repair and the hybrid solver.

Hours are 1-based in the public helpers (``tau_on``/``tau_off``) to match the
usual recursions; arrays are 0-based.  A unit's initial status ``sigma`` is
the signed number of hours it has been on (>0) or off (<0) before hour 1.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import RngStream, make_rng, random_population
from .optimizer import _trial, default_p

# Absolute slack used when comparing generated power against demand windows.
BALANCE_TOL = 1e-9


class RepairError(RuntimeError):
    """The candidate cannot be turned into a feasible schedule."""


class DispatchInfeasible(ValueError):
    """Committed capacity window does not meet the demand window."""


@dataclass(frozen=True)
class Unit:
    p_max: float
    p_min: float
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    gamma_up: int
    gamma_down: int
    sigma: int

    def __post_init__(self):
        if self.p_min > self.p_max:
            raise ValueError("p_min exceeds p_max")
        if self.gamma_up < 1 or self.gamma_down < 1:
            raise ValueError("minimum up/down times must be at least one hour")
        if self.sigma == 0:
            raise ValueError("sigma must be nonzero")

    def fuel(self, p):
        return self.a + self.b * p + self.c * p * p

    @property
    def full_load_cost(self) -> float:
        """Average cost per MW at full output, used as the commitment priority."""
        return self.fuel(self.p_max) / self.p_max

    @property
    def forced_off(self) -> int:
        """Leading hours the unit must stay off to honour its minimum down time."""
        return max(self.gamma_down + self.sigma, 0) if self.sigma < 0 else 0

    @property
    def forced_on(self) -> int:
        """Leading hours the unit must stay on to honour its minimum up time."""
        return max(self.gamma_up - self.sigma, 0) if self.sigma > 0 else 0


@dataclass
class UcpInstance:
    units: Tuple[Unit, ...]
    demand: np.ndarray
    reserve: np.ndarray
    epsilon: float = 0.0
    name: str = "ucp"

    def __post_init__(self):
        self.units = tuple(self.units)
        self.demand = np.asarray(self.demand, dtype=float)
        self.reserve = np.asarray(self.reserve, dtype=float)
        if self.demand.ndim != 1 or self.demand.size < 1:
            raise ValueError("demand must be a nonempty 1-D profile")
        if np.any(self.demand <= 0):
            raise ValueError("demand must be positive every hour")
        if self.reserve.shape != self.demand.shape:
            raise ValueError("reserve and demand profiles differ in length")

    @property
    def N(self) -> int:
        return len(self.units)

    @property
    def T(self) -> int:
        return self.demand.size

    def with_epsilon(self, epsilon: float) -> "UcpInstance":
        return UcpInstance(self.units, self.demand, self.reserve, epsilon, self.name)

    def column(self, attr: str) -> np.ndarray:
        return np.array([getattr(u, attr) for u in self.units], dtype=float)


def instance_from_dict(data: dict, name: str = "ucp") -> UcpInstance:
    units = [Unit(**row) for row in data["units"]]
    demand = np.asarray(data["demand"], dtype=float)
    if "reserve" in data:
        reserve = np.asarray(data["reserve"], dtype=float)
    else:
        reserve = data.get("reserve_fraction", 0.1) * demand
    return UcpInstance(units, demand, reserve, float(data.get("epsilon", 0.0)),
                       data.get("name", name))


def load_instance(path: Union[str, Path, None] = None) -> UcpInstance:
    """Read a JSON instance file; ``None`` loads the bundled 10-unit system."""
    if path is None:
        text = resources.files("blde").joinpath("data/ten_unit.json").read_text()
        return instance_from_dict(json.loads(text), "ten_unit")
    path = Path(path)
    return instance_from_dict(json.loads(path.read_text()), path.stem)


def ten_unit_instance(epsilon: float = 0.0) -> UcpInstance:
    return load_instance().with_epsilon(epsilon)


@dataclass
class Schedule:
    u: np.ndarray   # (N, T) commitment, uint8
    P: np.ndarray   # (N, T) dispatch in MW

    def copy(self) -> "Schedule":
        return Schedule(self.u.copy(), self.P.copy())


# --- durations and costs -------------------------------------------------------

def tau_off(unit: Unit, u_row: Sequence[int], t: int) -> int:
    """Hours unit has been continuously off at hour ``t`` (0 if on)."""
    tau = 0
    for s in range(1, t + 1):
        if u_row[s - 1]:
            tau = 0
        elif s == 1:
            tau = 1 if unit.sigma > 0 else 1 - unit.sigma
        else:
            tau += 1
    return tau


def tau_on(unit: Unit, u_row: Sequence[int], t: int) -> int:
    """Hours unit has been continuously on at hour ``t`` (0 if off)."""
    tau = 0
    for s in range(1, t + 1):
        if not u_row[s - 1]:
            tau = 0
        elif s == 1:
            tau = 1 if unit.sigma < 0 else 1 + unit.sigma
        else:
            tau += 1
    return tau


def startup_cost(unit: Unit, tau_off_val: float) -> float:
    """Hot start cost up to gamma_down + f hours off, cold start beyond."""
    if tau_off_val < unit.gamma_down:
        raise ValueError(
            f"start after {tau_off_val} h off violates the {unit.gamma_down} h minimum down time")
    return unit.d if tau_off_val <= unit.gamma_down + unit.f else unit.e


def _row_startup_cost(unit: Unit, row: Sequence[int]) -> float:
    total = 0.0
    prev_on = unit.sigma > 0
    off = 0 if prev_on else -unit.sigma
    for v in row:
        if v:
            if not prev_on:
                # an illegal start (repair prevents these) is charged as hot
                total += unit.d if off <= unit.gamma_down + unit.f else unit.e
            prev_on, off = True, 0
        else:
            prev_on, off = False, off + 1
    return total


def fuel_cost(sched: Schedule, inst: UcpInstance) -> float:
    a, b, c = inst.column("a")[:, None], inst.column("b")[:, None], inst.column("c")[:, None]
    P = sched.P
    return float(np.sum(sched.u * (a + b * P + c * P * P)))


def total_cost(sched: Schedule, inst: UcpInstance) -> float:
    """Fuel cost over committed hours plus start-up cost at every 0->1 switch."""
    starts = sum(_row_startup_cost(unit, sched.u[i]) for i, unit in enumerate(inst.units))
    return fuel_cost(sched, inst) + starts


# --- constraint report -----------------------------------------------------------

@dataclass
class ViolationReport:
    balance: List[Tuple[int, float]] = field(default_factory=list)     # (hour, residual)
    reserve: List[Tuple[int, float]] = field(default_factory=list)     # (hour, deficit MW)
    min_up: List[Tuple[int, int]] = field(default_factory=list)        # (unit, hour)
    min_down: List[Tuple[int, int]] = field(default_factory=list)      # (unit, hour)
    range: List[Tuple[int, int]] = field(default_factory=list)         # (unit, hour)

    @property
    def count(self) -> int:
        return (len(self.balance) + len(self.reserve) + len(self.min_up)
                + len(self.min_down) + len(self.range))

    @property
    def ok(self) -> bool:
        return self.count == 0


def _updown_violations(unit: Unit, row: Sequence[int]):
    """Yield ("up"|"down", hour) for every too-short block that ends before T.

    Hour is 1-based and marks the last hour of the short block; hour 0 flags
    a pre-horizon block cut short by the hour-1 status.
    """
    T = len(row)
    if unit.sigma > 0 and not row[0] and unit.sigma < unit.gamma_up:
        yield "up", 0
    if unit.sigma < 0 and row[0] and -unit.sigma < unit.gamma_down:
        yield "down", 0
    on = off = 0
    for t in range(1, T + 1):
        on = tau_on_step(unit, row[t - 1], t, on)
        off = tau_off_step(unit, row[t - 1], t, off)
        if t < T:
            if row[t - 1] and not row[t] and on < unit.gamma_up:
                yield "up", t
            if not row[t - 1] and row[t] and off < unit.gamma_down:
                yield "down", t


def tau_on_step(unit: Unit, v: int, t: int, prev: int) -> int:
    if not v:
        return 0
    if t == 1:
        return 1 if unit.sigma < 0 else 1 + unit.sigma
    return prev + 1


def tau_off_step(unit: Unit, v: int, t: int, prev: int) -> int:
    if v:
        return 0
    if t == 1:
        return 1 if unit.sigma > 0 else 1 - unit.sigma
    return prev + 1


def check_constraints(sched: Schedule, inst: UcpInstance) -> ViolationReport:
    u, P = sched.u, sched.P
    if u.shape != (inst.N, inst.T) or P.shape != u.shape:
        raise ValueError(f"schedule shape {u.shape} does not match ({inst.N}, {inst.T})")
    rep = ViolationReport()
    gen = np.sum(u * P, axis=0)
    resid = np.abs(gen / inst.demand - 1.0)
    for t in np.flatnonzero(resid > inst.epsilon + BALANCE_TOL):
        rep.balance.append((int(t) + 1, float(resid[t])))
    deficit = inst.demand + inst.reserve - inst.column("p_max") @ u
    for t in np.flatnonzero(deficit > BALANCE_TOL):
        rep.reserve.append((int(t) + 1, float(deficit[t])))
    for i, unit in enumerate(inst.units):
        for kind, t in _updown_violations(unit, u[i]):
            (rep.min_up if kind == "up" else rep.min_down).append((i, t))
        for t in range(inst.T):
            p = P[i, t]
            if u[i, t]:
                bad = p < unit.p_min - 1e-9 or p > unit.p_max + 1e-9
            else:
                bad = p != 0.0
            if bad:
                rep.range.append((i, t + 1))
    return rep


# --- economic dispatch ----------------------------------------------------------------

def dispatch(committed: Sequence[Unit], demand: float, epsilon: float = 0.0) -> np.ndarray:
    """Equal-incremental-cost dispatch of ``committed`` units.

    The total is placed at the cheapest point of the allowed window
    [demand(1-eps), demand(1+eps)], clamped to what the committed units can
    produce; a clamped result leaves a balance residual for
    :func:`check_constraints` to report.  Marginal costs b + 2cP agree
    across units not pinned at a bound.
    """
    if not committed:
        raise DispatchInfeasible("no committed units")
    pmin = np.array([u.p_min for u in committed], dtype=float)
    pmax = np.array([u.p_max for u in committed], dtype=float)
    b = np.array([u.b for u in committed], dtype=float)
    c = np.array([u.c for u in committed], dtype=float)
    if np.any(c <= 0):
        raise ValueError("dispatch needs strictly convex fuel curves (c > 0)")
    target = min(max(demand * (1 - epsilon), pmin.sum()), pmax.sum())

    def output(lam):
        return np.clip((lam - b) / (2 * c), pmin, pmax)

    # Total output is piecewise linear in lambda with kinks at these points.
    kinks = np.unique(np.concatenate([b + 2 * c * pmin, b + 2 * c * pmax]))
    totals = np.array([output(k).sum() for k in kinks])
    j = int(np.searchsorted(totals, target))
    if j == 0:
        return output(kinks[0])
    if j >= kinks.size:
        return output(kinks[-1])
    t0, t1 = totals[j - 1], totals[j]
    lam = kinks[j - 1] + (target - t0) * (kinks[j] - kinks[j - 1]) / (t1 - t0)
    return output(lam)


# --- repair ----------------------------------------------------------------------------

def _fix_row(unit: Unit, row: List[int]) -> List[int]:
    """Extend or fill blocks until the row meets minimum up/down times."""
    T = len(row)
    for h in range(min(unit.forced_off, T)):
        row[h] = 0
    for h in range(min(unit.forced_on, T)):
        row[h] = 1
    changed = True
    while changed:
        changed = False
        h = 0
        while h < T:
            v, s = row[h], h
            while h < T and row[h] == v:
                h += 1
            if h == T:
                break
            length = h - s
            if s == 0:
                if v and unit.sigma > 0:
                    length += unit.sigma
                elif not v and unit.sigma < 0:
                    length -= unit.sigma
            if v and length < unit.gamma_up:
                for q in range(h, min(h + unit.gamma_up - length, T)):
                    row[q] = 1
                changed = True
                break
            if not v and length < unit.gamma_down:
                for q in range(s, h):
                    row[q] = 1
                changed = True
                break
    return row


class Repairer:
    """Priority-list repair plus economic dispatch, memoized per instance.

    1. minimum up/down times: too-short on blocks are extended forward and
       too-short off blocks are filled (the initial off block is kept off);
    2. each hour short of spinning reserve commits the cheapest legal off
       units (by average full-load cost), then step 1 is re-run;
    3. hours whose committed minimum output overshoots the demand window
       decommit the dearest units that can be dropped without breaking 1-2;
    4. committed units are dispatched by :func:`dispatch`.
    """

    def __init__(self, inst: UcpInstance):
        self.inst = inst
        self.pmax = inst.column("p_max")
        self.pmin = inst.column("p_min")
        self.need = inst.demand + inst.reserve
        self.priority = sorted(range(inst.N), key=lambda i: inst.units[i].full_load_cost)
        self._rows: Dict[Tuple[int, bytes], np.ndarray] = {}
        self._hours: Dict[Tuple[int, int], Tuple[np.ndarray, float]] = {}
        self._starts: Dict[Tuple[int, bytes], float] = {}
        self._weights = 1 << np.arange(inst.N, dtype=np.int64)

    def fix_row(self, i: int, row: np.ndarray) -> np.ndarray:
        key = (i, row.tobytes())
        hit = self._rows.get(key)
        if hit is None:
            hit = np.array(_fix_row(self.inst.units[i], row.tolist()), dtype=np.uint8)
            self._rows[key] = hit
        return hit

    def _row_ok(self, i: int, row: np.ndarray) -> bool:
        return np.array_equal(self.fix_row(i, row), row)

    def commitment(self, u: np.ndarray) -> np.ndarray:
        inst = self.inst
        u = np.array(u, dtype=np.uint8)
        for i in range(inst.N):
            u[i] = self.fix_row(i, u[i])
        deficit = self.need - self.pmax @ u
        short = np.flatnonzero(deficit > BALANCE_TOL)
        if short.size:
            touched = set()
            for t in short:
                for i in self.priority:
                    if deficit[t] <= BALANCE_TOL:
                        break
                    if not u[i, t] and t >= inst.units[i].forced_off:
                        u[i, t] = 1
                        deficit[t] -= self.pmax[i]
                        touched.add(i)
                if deficit[t] > BALANCE_TOL:
                    raise RepairError(f"hour {t + 1}: spinning reserve unreachable")
            for i in touched:
                u[i] = self.fix_row(i, u[i])
        over = np.flatnonzero(self.pmin @ u > inst.demand * (1 + inst.epsilon) * (1 + BALANCE_TOL))
        for t in over:
            self._decommit(u, int(t))
        return u

    def _decommit(self, u: np.ndarray, t: int) -> None:
        inst = self.inst
        hi = inst.demand[t] * (1 + inst.epsilon) * (1 + BALANCE_TOL)
        for i in reversed(self.priority):
            if self.pmin @ u[:, t] <= hi:
                return
            if not u[i, t]:
                continue
            cand = u[i].copy()
            cand[t] = 0
            if not self._row_ok(i, cand):
                continue
            col = u[:, t].copy()
            col[i] = 0
            if self.pmax @ col < self.need[t] - BALANCE_TOL:
                continue
            u[i] = cand
        if self.pmin @ u[:, t] > hi:
            raise RepairError(f"hour {t + 1}: minimum output exceeds the demand window")

    def hour(self, t: int, mask: int) -> Tuple[np.ndarray, float]:
        """Dispatch and fuel cost for hour ``t`` with units in bitmask ``mask``."""
        key = (t, mask)
        hit = self._hours.get(key)
        if hit is None:
            inst = self.inst
            idx = [i for i in range(inst.N) if mask >> i & 1]
            p = np.zeros(inst.N)
            p[idx] = dispatch([inst.units[i] for i in idx], inst.demand[t], inst.epsilon)
            fuel = float(sum(inst.units[i].fuel(p[i]) for i in idx))
            hit = (p, fuel)
            self._hours[key] = hit
        return hit

    def start_cost(self, i: int, row: np.ndarray) -> float:
        key = (i, row.tobytes())
        hit = self._starts.get(key)
        if hit is None:
            hit = _row_startup_cost(self.inst.units[i], row.tolist())
            self._starts[key] = hit
        return hit

    def repair(self, u: np.ndarray) -> Tuple[Schedule, float]:
        """Return the repaired schedule and its total cost."""
        u = self.commitment(u)
        masks = (self._weights @ u).tolist()
        P = np.empty((self.inst.N, self.inst.T))
        cost = 0.0
        for t, mask in enumerate(masks):
            p, fuel = self.hour(t, mask)
            P[:, t] = p
            cost += fuel
        for i in range(self.inst.N):
            cost += self.start_cost(i, u[i])
        return Schedule(u, P), cost


def repair(sched: Schedule, inst: UcpInstance, rng: Optional[RngStream] = None) -> Schedule:
    """Feasible schedule built from ``sched``'s commitment.

    The heuristic is deterministic, so ``rng`` is accepted for interface
    compatibility but not consumed.  Incoming dispatch values are replaced.
    """
    return Repairer(inst).repair(np.asarray(sched.u))[0]


# --- hybrid solver -----------------------------------------------------------------------

@dataclass
class HybridConfig:
    pop_size: int = 100
    iterations: int = 2500
    F: float = 0.8
    CR: float = 0.5
    p: Optional[float] = None        # None -> default_p(N*T)
    seed: int = 0
    lamarckian: bool = True


@dataclass
class HybridResult:
    schedule: Schedule
    cost: float
    history: List[float]
    evaluations: int
    wall_time: float
    seed: int


def _distinct_triples(rng: RngStream, mu: int) -> np.ndarray:
    """Per individual i, three distinct indices all different from i."""
    out = np.empty((mu, 3), dtype=np.int64)
    for i in range(mu):
        choice = rng.choice(mu - 1, size=3, replace=False)
        out[i] = choice + (choice >= i)
    return out


def hybrid_solve(inst: UcpInstance, cfg: Optional[HybridConfig] = None, **kwargs) -> HybridResult:
    """Minimize total cost with BLDE on the commitment bits and DE/rand/1/bin on dispatch.

    Each individual carries N*T commitment bits (unit-major) and N*T real
    genes.  Every trial is repaired and costed; an individual is replaced
    when its trial costs no more.  With ``lamarckian`` set the repaired
    commitment and dispatch are written back into the population.
    """
    cfg = cfg or HybridConfig()
    for k, v in kwargs.items():
        setattr(cfg, k, v)
    if cfg.pop_size < 4:
        raise ValueError("DE/rand/1 needs a population of at least 4")
    N, T = inst.N, inst.T
    n = N * T
    p = default_p(n) if cfg.p is None else cfg.p
    rng = make_rng(cfg.seed)
    rep = Repairer(inst)
    lo = np.repeat(rep.pmin, T)
    hi = np.repeat(rep.pmax, T)
    mu = cfg.pop_size
    t0 = time.perf_counter()

    def evaluate(bits):
        sched, cost = rep.repair(bits.reshape(N, T))
        return sched, cost

    def seed_population():
        bits = random_population(mu, n, rng)
        reals = lo + rng.random((mu, n)) * (hi - lo)
        cost = np.empty(mu)
        for i in range(mu):
            sched, cost[i] = evaluate(bits[i])
            if cfg.lamarckian:
                bits[i] = sched.u.ravel()
                reals[i] = sched.P.ravel()
        return bits, reals, cost

    X, R, cost = seed_population()
    A, _, acost = seed_population()
    evaluations = 2 * mu
    b = int(np.argmin(cost))
    best_sched, best_cost = evaluate(X[b])[0], float(cost[b])
    history = [best_cost]

    for _ in range(cfg.iterations):
        g = int(np.argmin(cost))
        gbest = X[g].copy()
        start, cstart = X.copy(), cost.copy()
        ix = rng.integers(0, mu, size=mu)
        iy = rng.integers(0, mu, size=mu)
        iz = rng.integers(0, mu, size=mu)
        mutate = rng.random((mu, n)) <= p
        random_bits = rng.integers(0, 2, size=(mu, n), dtype=np.uint8)
        triples = _distinct_triples(rng, mu)
        cross = rng.random((mu, n)) < cfg.CR
        jrand = rng.integers(0, n, size=mu)
        for i in range(mu):
            tx = _trial(X[ix[i]], X[iy[i]], A[iz[i]], gbest,
                        cost[iy[i]] <= acost[iz[i]], mutate[i], random_bits[i])
            r1, r2, r3 = triples[i]
            v = np.clip(R[r1] + cfg.F * (R[r2] - R[r3]), lo, hi)
            c = cross[i].copy()
            c[jrand[i]] = True
            tr = np.where(c, v, R[i])
            sched, ct = evaluate(tx)
            evaluations += 1
            if ct < best_cost:
                best_sched, best_cost = sched, ct
            if ct <= cost[i]:
                if cfg.lamarckian:
                    X[i] = sched.u.ravel()
                    R[i] = sched.P.ravel()
                else:
                    X[i] = tx
                    R[i] = tr
                cost[i] = ct
        A, acost = start, cstart
        history.append(best_cost)

    return HybridResult(schedule=best_sched, cost=best_cost, history=history,
                        evaluations=evaluations, wall_time=time.perf_counter() - t0,
                        seed=cfg.seed)
