"""Classical simulator for k-local locally-indivisible open-system dynamics.

The heavy lifting lives in the compiled extension; this package re-exports
its surface.
"""

from openslt._core import (  # noqa: F401
    CapExceeded,
    ConfigError,
    ModelConfig,
    __version__,
    analyze,
    check_channel,
    expm,
    hptp_split,
    is_hptp,
    kron,
    one_to_one_norm,
    partial_trace,
    plan,
    required_slice_count,
    simulate,
    slt_error_bound,
    spectral_norm,
    to_choi,
    trace_norm,
    trials_needed,
    verify,
    wilson,
)

__all__ = [
    "CapExceeded",
    "ConfigError",
    "ModelConfig",
    "__version__",
    "analyze",
    "check_channel",
    "expm",
    "hptp_split",
    "is_hptp",
    "kron",
    "one_to_one_norm",
    "partial_trace",
    "plan",
    "required_slice_count",
    "simulate",
    "slt_error_bound",
    "spectral_norm",
    "to_choi",
    "trace_norm",
    "trials_needed",
    "verify",
    "wilson",
]
