"""Monte Carlo year simulation with numba-accelerated kernels."""
from ._backend import BACKEND
from .simulation import (
    LOLE_METHODS,
    CyberScenario,
    LoleEstimate,
    McConfig,
    McRun,
    YearTrace,
    availability_series,
    estimate_lole,
    lole_histogram,
    lolp_series,
    run_replications,
    simulate_year,
)

__all__ = [
    "BACKEND",
    "LOLE_METHODS",
    "CyberScenario",
    "LoleEstimate",
    "McConfig",
    "McRun",
    "YearTrace",
    "availability_series",
    "estimate_lole",
    "lole_histogram",
    "lolp_series",
    "run_replications",
    "simulate_year",
]
