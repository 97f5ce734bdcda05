"""Application protocols built on the register, Hamiltonian, and readout layers."""

from .arithmetic import phonon_add, phonon_subtract
from .fredkin import TruthTable, fredkin_truth_table
from .gkp import GkpParams, gkp_logical_expect, gkp_logical_matrix, gkp_marginals, gkp_prepare
from .jarzynski import JarzynskiResult, ThermoParams, jarzynski_run
from .fridge import FridgeConfig, FridgeResult, fridge_run
from .noon import FringeFit, half_number_difference, noon_parity_fringe, noon_prepare, qfi
from .vibronic import (
    CM1_TO_RAD_PER_S,
    DoktorovParams,
    Spectrum,
    doktorov_build,
    vibronic_fc,
    vibronic_sample,
    vibronic_spectrum,
)

__all__ = [
    "phonon_add",
    "phonon_subtract",
    "TruthTable",
    "fredkin_truth_table",
    "GkpParams",
    "gkp_prepare",
    "gkp_logical_expect",
    "gkp_logical_matrix",
    "gkp_marginals",
    "ThermoParams",
    "JarzynskiResult",
    "jarzynski_run",
    "FridgeConfig",
    "FridgeResult",
    "fridge_run",
    "FringeFit",
    "noon_prepare",
    "noon_parity_fringe",
    "half_number_difference",
    "qfi",
    "CM1_TO_RAD_PER_S",
    "DoktorovParams",
    "Spectrum",
    "doktorov_build",
    "vibronic_fc",
    "vibronic_spectrum",
    "vibronic_sample",
]
