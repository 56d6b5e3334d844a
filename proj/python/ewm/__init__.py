"""Anchored e-value watermarking: optimal e-values, couplings and sequential detection."""

from ._core import (  # noqa: F401
    EwmError,
    batch_detect,
    calibrate_null,
    decompose_target,
    entropy,
    estimate_stopping,
    extreme_coupling,
    jstar,
    mixture_coupling,
    noise_profile,
    null_worst_expectation,
    optimal_evalue,
    run_command,
    two_token_maxmin,
)

__version__ = "0.1.0"
