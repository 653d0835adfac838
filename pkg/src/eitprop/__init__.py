"""Bosonized Lambda-type EIT model: polariton dynamics, packet propagation, intensity and memory."""

from .dynamics import ModeState, evolve_exact, evolve_numeric
from .errors import NumericalError, ValidationError
from .model import (
    CouplingForm,
    GaussianPulse,
    MediumParams,
    ModeMixing,
    Regime,
    amplitude_ratio,
    group_velocities,
    mixing,
    split_regime,
    velocity_shift,
)

__version__ = "0.1.0"

__all__ = [
    "CouplingForm",
    "GaussianPulse",
    "MediumParams",
    "ModeMixing",
    "ModeState",
    "NumericalError",
    "Regime",
    "ValidationError",
    "amplitude_ratio",
    "evolve_exact",
    "evolve_numeric",
    "group_velocities",
    "mixing",
    "split_regime",
    "velocity_shift",
]
