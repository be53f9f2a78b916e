"""Simulator and solver suite for a renewable-powered edge system."""

from .config import (
    Config,
    PdsState,
    StateSpace,
    SystemState,
    default_config,
    enumerate_states,
    load_config,
    reduced_config,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "Config",
    "PdsState",
    "StateSpace",
    "SystemState",
    "default_config",
    "enumerate_states",
    "load_config",
    "reduced_config",
    "validate_config",
    "__version__",
]
