"""Remote state estimation with event, predictive and self triggers."""

from ._predtrig import (
    ConfigError,
    DimensionError,
    Model,
    NumericError,
    Prior,
    RangeError,
    preset,
    run_cli,
    simulate,
    steady_state_gap,
    steady_state_period,
    steady_state_posterior,
    sweep,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "Model",
    "NumericError",
    "Prior",
    "RangeError",
    "preset",
    "run_cli",
    "simulate",
    "steady_state_gap",
    "steady_state_period",
    "steady_state_posterior",
    "sweep",
]
