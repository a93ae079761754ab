"""Permafrost telemetry network simulator."""

from ._permasim import (
    ConfigError,
    byzantine_tolerance,
    default_config,
    fqc_message_count,
    load_mesh,
    mean_ci99,
    modes,
    normalize_config,
    pbft_message_count,
    run,
    summarize,
    superadditive_success,
    superposed_success,
    sweep,
    t_quantile,
)

__all__ = [
    "ConfigError",
    "byzantine_tolerance",
    "default_config",
    "fqc_message_count",
    "load_mesh",
    "mean_ci99",
    "modes",
    "normalize_config",
    "pbft_message_count",
    "run",
    "summarize",
    "superadditive_success",
    "superposed_success",
    "sweep",
    "t_quantile",
]
