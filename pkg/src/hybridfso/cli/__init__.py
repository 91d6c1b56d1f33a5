"""Batch front-end: config parsing, sweeps, figure presets and the verify gate."""

from .config import Base, Metric, Mode, SweepSpec, SweepVariable, parse_config, parse_config_text
from .presets import PRESETS, figure_preset
from .sweep import SweepRow, VerifyReport, run_sweep, verify, write_outputs

__all__ = [
    "Base", "Metric", "Mode", "SweepSpec", "SweepVariable", "parse_config", "parse_config_text",
    "PRESETS", "figure_preset", "SweepRow", "VerifyReport", "run_sweep", "verify", "write_outputs",
]
