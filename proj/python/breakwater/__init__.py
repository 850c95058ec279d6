"""Breakwater layout optimization: wave stand-in model, SPEA2/DE search and metrics."""

from ._core import (
    Baseline,
    ConfigurationError,
    EAConfig,
    History,
    Individual,
    Scenario,
    ValidationError,
    convert,
    evaluate,
    hypervolume,
    load_scenario,
    nondominated,
    optimize,
    reference_point,
    scenario_from_json,
    wave_field,
)

__all__ = [
    "Baseline",
    "ConfigurationError",
    "EAConfig",
    "History",
    "Individual",
    "Scenario",
    "ValidationError",
    "convert",
    "evaluate",
    "hypervolume",
    "load_scenario",
    "nondominated",
    "optimize",
    "reference_point",
    "scenario_from_json",
    "wave_field",
]
