"""Parameter inference for noisy stochastic oscillators."""

from ._core import (
    Error,
    __version__,
    analyze_trace,
    builtin_models,
    measure_distance,
    period_distance,
    run_experiment,
    simulate,
    validate_config,
)

__all__ = [
    "Error",
    "__version__",
    "analyze_trace",
    "builtin_models",
    "measure_distance",
    "period_distance",
    "run_experiment",
    "simulate",
    "validate_config",
]
