"""Experiment configs, Monte Carlo drivers, record emission and the CLI."""
from .config import ExperimentConfig, GridCell, load_config, spectral_grid
from .experiments import RUNNERS, ExperimentResult, run
from .records import COLUMNS, TrialRecord

__all__ = ["ExperimentConfig", "GridCell", "load_config", "spectral_grid", "RUNNERS",
           "ExperimentResult", "run", "COLUMNS", "TrialRecord"]
