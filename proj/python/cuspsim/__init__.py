"""Periodic cusps after a defect quench on a tight-binding ring."""

from ._core import (
    ConfigError,
    IdealModelParams,
    LatticeConfig,
    NumericalError,
    compare,
    derive_params,
    detect_cusps,
    evolve_truncated,
    populations,
    psi0,
    psi_n,
    run,
    run_exact,
    s_value,
    sinc_sum,
    uniform_grid,
)

__all__ = [
    "ConfigError",
    "IdealModelParams",
    "LatticeConfig",
    "NumericalError",
    "compare",
    "derive_params",
    "detect_cusps",
    "evolve_truncated",
    "populations",
    "psi0",
    "psi_n",
    "run",
    "run_exact",
    "s_value",
    "sinc_sum",
    "uniform_grid",
]
