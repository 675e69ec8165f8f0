"""Universal inverse sampler.

Draws samples from the prior implicit in a least-squares denoiser and solves
linear inverse problems by constrained coarse-to-fine ascent.
"""

import json as _json

from ._uis import (
    ArgumentError,
    ConfigError,
    ContractViolation,
    InfeasibleConstraint,
    Measurement,
    NumericError,
    Prior,
    SamplerAborted,
    UisError,
    effective_sigma,
    expected_sigma_next,
    injected_noise_amplitude,
    psnr,
    sample_conditional,
    sample_prior,
    ssim,
    step_size,
)
from . import _uis


def _dumps(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def prior(descriptor):
    """Analytic prior from a descriptor dict, e.g. {"type": "gaussian", "mean": [0, 0], "variance": 1}."""
    return _uis.prior_from_json(_dumps(descriptor))


def measurement(descriptor, shape=None):
    """Returns (Measurement, xc or None) from a descriptor dict."""
    return _uis.measurement_from_json(_dumps(descriptor), shape)


def run(config):
    """Runs a full task config; returns (exit_code, metrics dict)."""
    code, metrics = _uis.run(_dumps(config))
    return code, _json.loads(metrics)


__all__ = [
    "ArgumentError",
    "ConfigError",
    "ContractViolation",
    "InfeasibleConstraint",
    "Measurement",
    "NumericError",
    "Prior",
    "SamplerAborted",
    "UisError",
    "effective_sigma",
    "expected_sigma_next",
    "injected_noise_amplitude",
    "measurement",
    "prior",
    "psnr",
    "run",
    "sample_conditional",
    "sample_prior",
    "ssim",
    "step_size",
]
