"""Experiment orchestration: configs, seeded replicates, CSV, charts, CLI."""

from .config import ConfigError, ExperimentConfig, load_config
from .csvio import HEADER, read_csv, write_csv
from .experiment import ExperimentResult, mix_seed, run_experiment, run_replicate
from .plots import render_plots
