"""Robust state transfer through topological edge states of SSH-type qubit chains."""

__version__ = "0.1.0"

from .errors import ContractError, ConvergenceError, IntegrationError  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .model import (  # noqa: E402
    ChainSpec,
    Couplings,
    DisorderRealization,
    RampSchedule,
    WaveVector,
    apply_disorder,
    coupling_profile,
    sample_disorder,
)

__all__ = [
    "BACKEND",
    "ChainSpec",
    "ContractError",
    "ConvergenceError",
    "Couplings",
    "DisorderRealization",
    "IntegrationError",
    "RampSchedule",
    "WaveVector",
    "apply_disorder",
    "coupling_profile",
    "sample_disorder",
]
