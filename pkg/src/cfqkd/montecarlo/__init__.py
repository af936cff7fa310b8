"""Pulse-level Monte Carlo engine."""
from .simulate import (
    PulseRecord,
    SimulationSummary,
    Source,
    StatComparison,
    compare_to_analytic,
    simulate,
    write_records,
)

__all__ = [
    "PulseRecord",
    "SimulationSummary",
    "Source",
    "StatComparison",
    "compare_to_analytic",
    "simulate",
    "write_records",
]
