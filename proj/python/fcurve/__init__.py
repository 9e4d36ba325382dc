"""Forward curve dynamics on a discretised weighted function space."""

from ._core import (
    ConfigError,
    Curve,
    Error,
    NumericalError,
    Space,
    SpecViolation,
    apply_kernel,
    exp_kernel_correlation,
    h_curve,
    inner_product,
    multiply,
    run_criterion,
    schur_bound,
    shift,
    simulate,
    spatial_correlation,
    sup_norm,
)

__all__ = [
    "ConfigError",
    "Curve",
    "Error",
    "NumericalError",
    "Space",
    "SpecViolation",
    "apply_kernel",
    "exp_kernel_correlation",
    "h_curve",
    "inner_product",
    "multiply",
    "run_criterion",
    "schur_bound",
    "shift",
    "simulate",
    "spatial_correlation",
    "sup_norm",
]
