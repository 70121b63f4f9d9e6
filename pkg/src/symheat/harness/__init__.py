"""Experiment harness: config files, runs, comparisons, CSV/SVG output."""
from .config import ExperimentConfig, TimePolicy, build_oracle, load_config, parse_config
from .runner import Comparison, RunReport, RunResult, check_mesh, compare, run, simulate

__all__ = [
    "Comparison", "ExperimentConfig", "RunReport", "RunResult", "TimePolicy",
    "build_oracle", "check_mesh", "compare", "load_config", "parse_config", "run", "simulate",
]
