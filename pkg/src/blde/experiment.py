"""Seeded batch runner: configs in, CSV tables and metric curves out."""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .benchmarks import PROBLEM_NAMES, make_problem
from .metrics import MetricSeries
from .mkp import MkpProblem, load_mkp
from .optimizer import ALGORITHMS, BldeConfig, RunResult
from .stats import RunBatch, SYMBOLS, summarize, wilcoxon_ranksum

OUTPUT_ENV = "BLDE_OUTPUT_DIR"

RUNS_HEADER = ["problem", "algorithm", "run", "seed", "best_fitness", "fes", "success"]
TIMINGS_HEADER = ["problem", "algorithm", "run", "seed", "wall_time"]
SUMMARY_HEADER = ["algorithm", "problem", "runs", "ave_fit", "std_dev", "sr", "runtime"]
METRICS_HEADER = ["generation", "alpha", "beta"]
VERDICT_HEADER = ["problem", "algorithm_a", "algorithm_b", "p_value", "verdict", "symbol"]


class ConfigError(ValueError):
    pass


@dataclass
class ProblemEntry:
    name: str
    instance: Optional[str] = None
    runs: Optional[int] = None
    mu: Optional[int] = None
    p: Optional[float] = None
    budget_multiplier: Optional[int] = None
    max_fe: Optional[int] = None
    n: Optional[int] = None
    success_tol: Optional[float] = None


@dataclass
class ExperimentConfig:
    problems: List[ProblemEntry]
    algorithm: str = "blde"
    mu: int = 50
    p: Optional[float] = None
    budget_multiplier: int = 300
    runs: int = 50
    base_seed: int = 0
    output_dir: str = "results"
    archive_snapshot: str = "pre"
    workers: int = 1

    def validate(self) -> None:
        if not self.problems:
            raise ConfigError("no problems listed")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.budget_multiplier < 1:
            raise ConfigError("budget_multiplier must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; have {sorted(ALGORITHMS)}")
        for entry in self.problems:
            if entry.name == "P8":
                if not entry.instance:
                    raise ConfigError("P8 entries need an 'instance' path")
            elif entry.name not in PROBLEM_NAMES:
                raise ConfigError(f"unknown problem {entry.name!r}")
            if entry.runs is not None and entry.runs < 1:
                raise ConfigError(f"{entry.name}: runs must be >= 1")


def config_from_dict(data: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    entry_keys = {f.name for f in fields(ProblemEntry)}
    problems = []
    for raw in data.get("problems", []):
        if isinstance(raw, str):
            raw = {"name": raw}
        bad = set(raw) - entry_keys
        if bad:
            raise ConfigError(f"unknown problem keys: {sorted(bad)}")
        if "name" not in raw:
            raise ConfigError("problem entry without a name")
        problems.append(ProblemEntry(**raw))
    cfg = ExperimentConfig(problems=problems,
                           **{k: v for k, v in data.items() if k != "problems"})
    cfg.validate()
    return cfg


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(data)


def build_problem(entry: ProblemEntry):
    if entry.name == "P8":
        path = Path(entry.instance)
        if not path.is_file():
            raise FileNotFoundError(f"MKP instance file not found: {path}")
        prob = MkpProblem(load_mkp(path))
        if entry.success_tol is not None:
            prob.success_tol = entry.success_tol
        return prob
    overrides = {}
    if entry.n is not None:
        overrides["n"] = entry.n
    if entry.success_tol is not None:
        overrides["success_tol"] = entry.success_tol
    return make_problem(entry.name, **overrides)


def _run_one(args):
    entry, algorithm, bcfg = args
    return ALGORITHMS[algorithm](build_problem(entry), bcfg)


def run_batch(entry: ProblemEntry, cfg: ExperimentConfig) -> List[RunResult]:
    """All seeded runs for one problem, ordered by run index."""
    problem = build_problem(entry)
    runs = entry.runs or cfg.runs
    mult = entry.budget_multiplier or cfg.budget_multiplier
    max_fe = entry.max_fe or mult * problem.n_bits * getattr(problem, "fe_multiplier", 1)
    jobs = [
        (entry, cfg.algorithm, BldeConfig(
            mu=entry.mu or cfg.mu,
            p=entry.p if entry.p is not None else cfg.p,
            max_fe=max_fe,
            seed=cfg.base_seed + k,
            archive_snapshot=cfg.archive_snapshot,
        ))
        for k in range(runs)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(job) for job in jobs]


def mean_curve(results: Sequence[RunResult]) -> MetricSeries:
    """Per-generation mean of alpha and beta over runs (truncated to the shortest)."""
    lengths = [len(r.metrics) for r in results if len(r.metrics)]
    if not lengths:
        return MetricSeries()
    g = min(lengths)
    alpha = np.mean([r.metrics.alpha[:g] for r in results if len(r.metrics)], axis=0)
    beta = np.mean([r.metrics.beta[:g] for r in results if len(r.metrics)], axis=0)
    return MetricSeries(alpha.tolist(), beta.tolist())


def emit_metric_curves(series: MetricSeries, path: Union[str, Path]) -> Path:
    if len(series) == 0:
        raise ValueError("metric series is empty")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for g, (a, b) in enumerate(zip(series.alpha, series.beta), start=1):
            w.writerow([g, repr(float(a)), repr(float(b))])
    return path


def _write(path: Path, header: List[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def resolve_output_dir(cfg: ExperimentConfig, override: Optional[str] = None) -> Path:
    return Path(override or os.environ.get(OUTPUT_ENV) or cfg.output_dir)


def run_experiment(cfg: ExperimentConfig, output_dir: Optional[str] = None) -> Dict[str, Path]:
    """Run every problem batch and write runs/timings/summary/metrics CSVs."""
    cfg.validate()
    out = resolve_output_dir(cfg, output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for entry in cfg.problems:  # fail before any work if a file is missing
        if entry.instance and not Path(entry.instance).is_file():
            raise FileNotFoundError(f"MKP instance file not found: {entry.instance}")

    run_rows, time_rows, summary_rows = [], [], []
    artifacts: Dict[str, Path] = {}
    for entry in cfg.problems:
        results = run_batch(entry, cfg)
        label = results[0].problem
        for k, r in enumerate(results):
            run_rows.append([label, r.algorithm, k, r.seed, repr(r.best_fitness),
                             r.fe_used, int(r.success)])
            time_rows.append([label, r.algorithm, k, r.seed, repr(r.wall_time)])
        s = summarize(RunBatch([r.best_fitness for r in results],
                               [r.wall_time for r in results],
                               [r.success for r in results]))
        summary_rows.append([cfg.algorithm, label, s.runs, repr(s.ave_fit), repr(s.std_dev),
                             repr(s.sr_percent), repr(s.mean_runtime)])
        curve = mean_curve(results)
        if len(curve):
            artifacts[f"metrics_{label}"] = emit_metric_curves(curve, out / f"metrics_{label}.csv")

    for name, header, rows in (("runs", RUNS_HEADER, run_rows),
                               ("timings", TIMINGS_HEADER, time_rows),
                               ("summary", SUMMARY_HEADER, summary_rows)):
        path = out / f"{name}.csv"
        _write(path, header, rows)
        artifacts[name] = path
    return artifacts


def read_runs(path: Union[str, Path]) -> Dict[str, Dict[str, list]]:
    """Group a runs.csv by problem: {problem: {"algorithm", "fitness", "success"}}."""
    groups: Dict[str, Dict[str, list]] = {}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RUNS_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ConfigError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            g = groups.setdefault(row["problem"], {"algorithm": [], "fitness": [], "success": []})
            g["algorithm"].append(row["algorithm"])
            g["fitness"].append(float(row["best_fitness"]))
            g["success"].append(row["success"] == "1")
    return groups


def compare_runs(path_a: Union[str, Path], path_b: Union[str, Path],
                 alpha: float = 0.05) -> List[dict]:
    """Rank-sum verdict of A against B for every problem present in both files."""
    a, b = read_runs(path_a), read_runs(path_b)
    rows = []
    for problem in [p for p in a if p in b]:
        res = wilcoxon_ranksum(a[problem]["fitness"], b[problem]["fitness"], alpha)
        rows.append({
            "problem": problem,
            "algorithm_a": a[problem]["algorithm"][0],
            "algorithm_b": b[problem]["algorithm"][0],
            "p_value": res.p_value,
            "verdict": res.verdict,
            "symbol": res.symbol,
        })
    return rows


def write_verdicts(rows: List[dict], path: Union[str, Path]) -> Path:
    path = Path(path)
    _write(path, VERDICT_HEADER, [[r[k] if k != "p_value" else repr(r[k]) for k in VERDICT_HEADER]
                                  for r in rows])
    return path


def verdict_table(rows: List[dict]) -> str:
    """Group problems by +/≈/- in the style of a rank-sum comparison table."""
    lines = []
    for sym in SYMBOLS.values():
        probs = [r["problem"] for r in rows if r["symbol"] == sym]
        lines.append(f"{sym}: {', '.join(probs) if probs else '∅'}")
    return "\n".join(lines)
