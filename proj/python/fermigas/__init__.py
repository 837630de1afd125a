"""Python bindings for the fermigas C++ core."""

from ._core import (
    ConvergenceError,
    FermiBall,
    InvalidArgument,
    InvariantViolation,
    Potential,
    ResourceLimitError,
    n_exchange,
    n_rpa,
    oracle,
    potential,
    run_cli,
)

__all__ = [
    "ConvergenceError",
    "FermiBall",
    "InvalidArgument",
    "InvariantViolation",
    "Potential",
    "ResourceLimitError",
    "n_exchange",
    "n_rpa",
    "oracle",
    "potential",
    "run_cli",
]
