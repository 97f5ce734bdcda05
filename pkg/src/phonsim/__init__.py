"""phonsim: trapped-ion vibrational-mode simulation on truncated Fock spaces."""

__version__ = "0.1.0"

from .hilbert import (
    DEFAULT_LEAKAGE_TOL,
    HybridState,
    LeakageError,
    ModeRegister,
    ModeSpec,
    OperatorMatrix,
    QubitSpec,
    RegisterMismatchError,
)

__all__ = [
    "__version__",
    "DEFAULT_LEAKAGE_TOL",
    "HybridState",
    "LeakageError",
    "ModeRegister",
    "ModeSpec",
    "OperatorMatrix",
    "QubitSpec",
    "RegisterMismatchError",
]
