"""Bayesian estimation of stochastic volatility diffusions."""

import json

from ._core import (
    NumericalError,
    ValidationError,
    acf,
    fit,
    iact,
    ingest_csv,
    kde,
    ks_two_sample,
    log_end_density,
    log_girsanov,
    model_params,
    models,
    simulate,
    summarize,
    u_time,
    z_time,
)


def run(config, times, values):
    """fit() taking the configuration as a dict."""
    return fit(json.dumps(config), times, values)


def simulate_dict(config):
    """simulate() taking the configuration as a dict."""
    return simulate(json.dumps(config))


__all__ = [
    "NumericalError", "ValidationError", "acf", "fit", "iact", "ingest_csv", "kde",
    "ks_two_sample", "log_end_density", "log_girsanov", "model_params", "models", "run",
    "simulate", "simulate_dict", "summarize", "u_time", "z_time",
]
