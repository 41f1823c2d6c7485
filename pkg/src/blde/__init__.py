"""Binary learning differential evolution with benchmarks, knapsack and unit-commitment solvers."""
from .benchmarks import PROBLEM_NAMES, make_problem
from .core import hamming, make_rng
from .metrics import MetricSeries, refinement_metric, renewal_metric
from .optimizer import BldeConfig, RunResult, blde_run, make_trial
from .stats import summarize, wilcoxon_ranksum

__all__ = [
    "PROBLEM_NAMES", "make_problem", "hamming", "make_rng", "MetricSeries",
    "refinement_metric", "renewal_metric", "BldeConfig", "RunResult", "blde_run",
    "make_trial", "summarize", "wilcoxon_ranksum",
]
__version__ = "0.1.0"
