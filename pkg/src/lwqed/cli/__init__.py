"""Configuration-driven command-line front end."""

from .config import EXPERIMENTS, Diagnostic, ExperimentConfig, load_config, validate_config
from .experiments import run_experiment
from .io import ResultTable, read_table, write_table

__all__ = [
    "EXPERIMENTS",
    "Diagnostic",
    "ExperimentConfig",
    "ResultTable",
    "load_config",
    "read_table",
    "run_experiment",
    "validate_config",
    "write_table",
]
