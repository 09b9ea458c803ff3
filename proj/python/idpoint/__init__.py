"""Python bindings for the idpoint simulation library."""

from ._core import (
    ConfigError,
    DomainError,
    LevyMeasure,
    PreconditionError,
    __version__,
    block_scheme,
    fk_sums,
    iid_row,
    ks_two_sample,
    laplace_analytic,
    linear_row,
    recipes,
    run_config,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "LevyMeasure",
    "PreconditionError",
    "__version__",
    "block_scheme",
    "fk_sums",
    "iid_row",
    "ks_two_sample",
    "laplace_analytic",
    "linear_row",
    "recipes",
    "run_config",
]
