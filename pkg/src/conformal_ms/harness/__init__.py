"""Experiment harness: configuration, presets, runner and command line."""

from .config import RunConfig, load_config, parse_config, serialize_config
from .figures import FIGURES, emit_figures_data
from .presets import PRESETS, preset
from .runner import RunSummary, convergence_study, read_snapshot, run

__all__ = [
    "RunConfig",
    "parse_config",
    "load_config",
    "serialize_config",
    "PRESETS",
    "preset",
    "run",
    "RunSummary",
    "read_snapshot",
    "convergence_study",
    "FIGURES",
    "emit_figures_data",
]
