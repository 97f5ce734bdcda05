"""Approximate grid-code states: displaced-squeezed combs and logical Paulis.

The logical zero is a finite comb ``sum_k c_k D(k l) S(r)|0>`` with a
Gaussian envelope over ``k = -K .. K``; logical Paulis are the displacement
operators ``X = D(l/2)``, ``Z = D(i pi / l)``, ``Y = D(-l/2 - i pi / l)``,
which anticommute for any spacing ``l``. Marginals are reported over the
displacement-plane coordinate (the real or imaginary part of the coherent
amplitude), where the comb peaks sit at spacing ``l``; multiply the axis by
``sqrt(2)`` for the ``(a + a^dag)/sqrt2`` quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..hilbert import (
    DEFAULT_LEAKAGE_TOL,
    HybridState,
    ModeRegister,
    check_leakage,
    displacement_matrix,
    squeeze_matrix,
    state_from_amplitudes,
)

__all__ = ["GkpParams", "gkp_prepare", "gkp_logical_matrix", "gkp_logical_expect", "gkp_marginals"]


@dataclass(frozen=True)
class GkpParams:
    """Comb geometry: spacing, squeeze, half-width, and envelope variance.

    Defaults give the square-lattice spacing ``2 sqrt(pi)`` and the
    three-component logical zero (``K = 1``). Envelope weights are
    ``c_k ~ exp(-(k l)^2 / (2 envelope_var))`` before normalization.
    """

    spacing: float = 2.0 * np.sqrt(np.pi)
    squeeze: float = 0.9
    half_width: int = 1
    envelope_var: float = 10.0

    def __post_init__(self):
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.half_width < 0:
            raise ValueError("half_width must be >= 0")
        if self.envelope_var <= 0:
            raise ValueError("envelope_var must be positive")

    def envelope(self, k: int) -> float:
        return float(np.exp(-((k * self.spacing) ** 2) / (2.0 * self.envelope_var)))


def gkp_prepare(
    register: ModeRegister,
    params: GkpParams,
    mode: int = 0,
    leakage_tol: float = DEFAULT_LEAKAGE_TOL,
) -> HybridState:
    """Normalized comb of displaced squeezed states on one mode (qubit dark)."""
    dim = register.modes[mode].dim
    squeezed = squeeze_matrix(dim, params.squeeze)[:, 0]
    comb = np.zeros(dim, dtype=np.complex128)
    for k in range(-params.half_width, params.half_width + 1):
        comb += params.envelope(k) * (displacement_matrix(dim, k * params.spacing) @ squeezed)
    vec = np.zeros(register.dims, dtype=np.complex128)
    sel = [0] * (register.n_modes + 1)  # qubit and all modes in the ground state
    sel[register.axis(mode)] = slice(None)
    vec[tuple(sel)] = comb
    return check_leakage(state_from_amplitudes(register, vec.reshape(-1)), leakage_tol)


def gkp_logical_matrix(dim: int, params: GkpParams, which: str) -> np.ndarray:
    """Logical Pauli as a displacement matrix on ``dim`` levels."""
    l = params.spacing
    amounts = {
        "x": l / 2.0,
        "z": 1j * np.pi / l,
        "y": -l / 2.0 - 1j * np.pi / l,
    }
    try:
        alpha = amounts[which.lower()]
    except KeyError:
        raise ValueError("which must be 'x', 'y', or 'z'") from None
    return displacement_matrix(dim, alpha)


def gkp_logical_expect(state: HybridState, params: GkpParams, which: str, mode: int = 0) -> complex:
    """Overlap ``<psi| Pauli |psi>`` of a logical displacement (complex)."""
    register = state.register
    dim = register.modes[mode].dim
    op = gkp_logical_matrix(dim, params, which)
    tens = np.moveaxis(state.tensor_view(), register.axis(mode), -1)
    shifted = tens @ op.T  # apply on the mode axis
    return complex(np.vdot(tens.reshape(-1), shifted.reshape(-1)))


def _hermite_functions(n_levels: int, xs: np.ndarray) -> np.ndarray:
    """Harmonic-oscillator eigenfunctions ``phi_n(x)`` by stable recurrence."""
    out = np.empty((n_levels, xs.size))
    out[0] = np.pi**-0.25 * np.exp(-0.5 * xs**2)
    if n_levels > 1:
        out[1] = np.sqrt(2.0) * xs * out[0]
    for n in range(2, n_levels):
        out[n] = np.sqrt(2.0 / n) * xs * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


def gkp_marginals(
    state: HybridState,
    quadrature: str = "position",
    mode: int = 0,
    grid: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Sampled marginal density along position or momentum.

    The axis is in displacement units (real/imaginary part of the coherent
    amplitude): a comb ``sum_k c_k D(k l)|r>`` peaks at ``q = k l``. The
    returned density integrates to one over the axis.
    """
    if quadrature not in ("position", "momentum"):
        raise ValueError("quadrature must be 'position' or 'momentum'")
    register = state.register
    dim = register.modes[mode].dim
    tens = np.moveaxis(state.tensor_view(), register.axis(mode), -1)
    coeffs = tens.reshape(-1, dim)  # rows: other factors, columns: mode levels
    if quadrature == "momentum":
        coeffs = coeffs * (-1j) ** np.arange(dim)
    if grid is None:
        span = 1.2 * (np.sqrt(dim) + 1.0) / np.sqrt(2.0)
        grid = np.linspace(-span, span, 2001)
    # wavefunctions on the x = (a+a^dag)/sqrt2 axis, evaluated at x = sqrt2*q
    phi = _hermite_functions(dim, np.sqrt(2.0) * grid)
    waves = coeffs @ phi  # (others, len(grid))
    density = np.sqrt(2.0) * np.sum(np.abs(waves) ** 2, axis=0)
    return grid, density
