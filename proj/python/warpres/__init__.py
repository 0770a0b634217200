"""Resolvent bounds on warped ends: Python bindings to the C++ core."""

from ._warpres import (
    ChainError,
    ConfigError,
    Tridiag,
    chain_coefficients,
    cutoff_norm,
    dense_sigma_min,
    kappa_schedule,
    path_gamma,
    phase_profile,
    predicted_exponent,
    q0,
    resolved_config,
    run_command,
    schedule_violation,
    sigma_min,
)

__all__ = [
    "ChainError",
    "ConfigError",
    "Tridiag",
    "chain_coefficients",
    "cutoff_norm",
    "dense_sigma_min",
    "kappa_schedule",
    "path_gamma",
    "phase_profile",
    "predicted_exponent",
    "q0",
    "resolved_config",
    "run_command",
    "schedule_violation",
    "sigma_min",
]
