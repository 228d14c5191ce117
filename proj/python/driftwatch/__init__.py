"""Cusum change-point tests for discretely observed diffusions."""

import json

from ._driftwatch import (
    DriftwatchError,
    __version__,
    critical_values,
    cusum,
    default_step,
    estimate_ou,
    kolmogorov_cdf,
    kolmogorov_upper_point,
    misspecified_limits,
    simulate_ou,
    test_ou,
)
from ._driftwatch import run_experiment as _run_experiment


def run_experiment(config):
    """Run a campaign from a config dict (or JSON string); returns the result dict."""
    if not isinstance(config, str):
        config = json.dumps(config)
    return _run_experiment(config)


__all__ = [
    "DriftwatchError",
    "__version__",
    "critical_values",
    "cusum",
    "default_step",
    "estimate_ou",
    "kolmogorov_cdf",
    "kolmogorov_upper_point",
    "misspecified_limits",
    "run_experiment",
    "simulate_ou",
    "test_ou",
]
