"""Experiment harness: configuration, sweeps, Monte Carlo, trajectories and the CLI."""

from .config import FluctuationSpec, RunConfig, config_from_mapping, load_config
from .montecarlo import MonteCarloResult, monte_carlo
from .pipeline import GateRun, run_variant
from .sweep import SweepSpec, sweep
from .trajectory import trajectory_table

__all__ = [
    "FluctuationSpec", "RunConfig", "config_from_mapping", "load_config", "MonteCarloResult", "monte_carlo",
    "GateRun", "run_variant", "SweepSpec", "sweep", "trajectory_table",
]
