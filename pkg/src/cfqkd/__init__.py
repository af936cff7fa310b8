"""Detector-blinding attacks on counterfactual QKD.

Closed-form detector statistics, a minimax search over the eavesdropper's
parameters and a pulse-level Monte Carlo engine that checks both.
"""
from .analytic import (
    attack_stats,
    baseline_stats,
    loss_fluctuation_equivalent,
    ratio_report,
    solve_y,
    solve_z0,
)
from .model import (
    AttackParams,
    AttackScenario,
    ConfigError,
    DegenerateBaselineError,
    DetectionStats,
    Discrimination,
    Polarization,
    ProtocolConfig,
    RatioReport,
    db_from_transmission,
    transmission_from_db,
    validate_config,
)
from .optimizer import OptimizationResult, optimize, reproduce_tables

__version__ = "0.1.0"

__all__ = [
    "AttackParams",
    "AttackScenario",
    "ConfigError",
    "DegenerateBaselineError",
    "DetectionStats",
    "Discrimination",
    "OptimizationResult",
    "Polarization",
    "ProtocolConfig",
    "RatioReport",
    "attack_stats",
    "baseline_stats",
    "db_from_transmission",
    "loss_fluctuation_equivalent",
    "optimize",
    "ratio_report",
    "reproduce_tables",
    "solve_y",
    "solve_z0",
    "transmission_from_db",
    "validate_config",
]
