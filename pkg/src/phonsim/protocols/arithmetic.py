"""Phonon addition and subtraction: arithmetic shifts without bosonic factors.

Both operations are the ideal-pulse limit of a uniform sideband transfer
paired with a carrier pi pulse, so the Fock amplitudes move without the
``sqrt(n)`` reweighting of the ladder operators: addition maps
``c_n |n> -> c_n |n+1>`` exactly. Subtraction runs the reverse sequence and
detects fluorescence; the former ground-state component turns bright, so
only no-fluorescence runs keep the state (heralded success with probability
``1 - P(0)``).
"""

from __future__ import annotations

import numpy as np

from ..hilbert import HybridState, LeakageError, state_from_amplitudes

__all__ = ["phonon_add", "phonon_subtract"]

_TOP_TOL = 1e-12


def phonon_add(state: HybridState, mode: int) -> HybridState:
    """Shift every Fock amplitude of ``mode`` up by one level.

    The top truncated level must be unoccupied; otherwise amplitude would be
    pushed off the ladder and the operation refuses to proceed.
    """
    register = state.register
    axis = register.axis(mode)
    tens = np.moveaxis(state.tensor_view().copy(), axis, 0)
    top = float(np.sum(np.abs(tens[-1]) ** 2))
    if top > _TOP_TOL:
        raise LeakageError(
            f"top Fock level of mode {mode} holds population {top:.3e}; "
            "increase the truncation before adding"
        )
    shifted = np.zeros_like(tens)
    shifted[1:] = tens[:-1]
    return state_from_amplitudes(register, np.moveaxis(shifted, 0, axis).reshape(-1))


def phonon_subtract(
    state: HybridState,
    mode: int,
    rng: np.random.Generator,
) -> tuple[HybridState, bool]:
    """Remove one quantum from ``mode``, heralded on a dark detection.

    Returns ``(state, True)`` with amplitudes shifted down one level when the
    herald succeeds, and ``(collapsed ground state, False)`` when the vacuum
    component fluoresced and the run is conditioned out.
    """
    register = state.register
    axis = register.axis(mode)
    tens = np.moveaxis(state.tensor_view().copy(), axis, 0)
    p_vacuum = float(np.sum(np.abs(tens[0]) ** 2))
    if rng.random() < p_vacuum:
        collapsed = np.zeros_like(tens)
        collapsed[0] = tens[0]
        return (
            state_from_amplitudes(register, np.moveaxis(collapsed, 0, axis).reshape(-1)),
            False,
        )
    shifted = np.zeros_like(tens)
    shifted[:-1] = tens[1:]
    return (
        state_from_amplitudes(register, np.moveaxis(shifted, 0, axis).reshape(-1)),
        True,
    )
