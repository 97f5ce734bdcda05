"""Vibronic line strengths from the displacement-squeeze-rotation sequence.

An electronic transition within the harmonic approximation maps the initial
vibrational modes onto the final ones through a mode rotation, per-mode
frequency rescalings, and an equilibrium displacement. The corresponding
bosonic operator factorizes as ``D(alpha) S^dag(zeta') R(theta) S(zeta)``
applied right to left; line intensities are the squared overlaps
``|<n| U |0>|^2`` (the Franck-Condon table), and stick positions sit at
``sum_i n_i w'_i`` above the 0-0 line.

Squeeze parameters derive from the mode frequencies as
``zeta_i = ln(w_i / w_ref) / 2`` against a common reference frequency; the
composite is invariant under the choice of ``w_ref`` (a uniform squeeze
commutes with real mode rotations), and the geometric mean of all
frequencies is used to keep truncation effects minimal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..hilbert import ModeRegister, OperatorMatrix, displacement_matrix, mode_ladder, squeeze_matrix

__all__ = [
    "CM1_TO_RAD_PER_S",
    "DoktorovParams",
    "Spectrum",
    "doktorov_build",
    "vibronic_fc",
    "vibronic_spectrum",
    "vibronic_sample",
]

#: 1 cm^-1 = 2 pi x 29.9792458 GHz in angular frequency.
CM1_TO_RAD_PER_S = 2.0 * np.pi * 29.9792458e9


@dataclass(frozen=True)
class DoktorovParams:
    """Initial/final mode frequencies (cm^-1), displacement, and rotation.

    ``rotation`` is a single angle for two modes, or a sequence of
    ``(i, j, angle)`` plane rotations applied in order for more modes.
    ``displacement`` components are dimensionless coherent amplitudes.
    """

    initial_freqs_cm1: tuple[float, ...]
    final_freqs_cm1: tuple[float, ...]
    displacement: tuple[float, ...]
    rotation: float | tuple = 0.0

    def __post_init__(self):
        object.__setattr__(self, "initial_freqs_cm1", tuple(map(float, self.initial_freqs_cm1)))
        object.__setattr__(self, "final_freqs_cm1", tuple(map(float, self.final_freqs_cm1)))
        object.__setattr__(self, "displacement", tuple(map(complex, self.displacement)))
        n = len(self.initial_freqs_cm1)
        if len(self.final_freqs_cm1) != n or len(self.displacement) != n:
            raise ValueError("frequency and displacement vectors must share one length")
        if any(f <= 0 for f in self.initial_freqs_cm1 + self.final_freqs_cm1):
            raise ValueError("frequencies must be positive")

    @property
    def n_modes(self) -> int:
        return len(self.initial_freqs_cm1)

    def rotation_pairs(self) -> tuple[tuple[int, int, float], ...]:
        if isinstance(self.rotation, (int, float)):
            if self.n_modes == 1:
                if self.rotation != 0.0:
                    raise ValueError("a single mode admits no rotation")
                return ()
            if self.n_modes != 2:
                raise ValueError("scalar rotation only defined for two modes")
            return ((0, 1, float(self.rotation)),)
        return tuple((int(i), int(j), float(th)) for i, j, th in self.rotation)

    def squeeze_parameters(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-mode squeezes against the geometric-mean reference frequency."""
        wi = np.asarray(self.initial_freqs_cm1)
        wf = np.asarray(self.final_freqs_cm1)
        w_ref = np.exp(np.mean(np.log(np.concatenate([wi, wf]))))
        return 0.5 * np.log(wi / w_ref), 0.5 * np.log(wf / w_ref)


def _apply_mode_matrix(vec: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(mat, vec, axes=([1], [axis])), 0, axis)


def _rotation_unitary(dims: tuple[int, ...], i: int, j: int, theta: float) -> np.ndarray:
    """Plane rotation ``exp(theta (a_i^dag a_j - a_i a_j^dag))`` on two modes."""
    li, lj = mode_ladder(dims[i]), mode_ladder(dims[j])
    cross = np.kron(li.raise_, lj.lower)
    gen = theta * (cross - cross.conj().T)  # antihermitian
    w, v = np.linalg.eigh(1j * gen)
    return (v * np.exp(-1j * w)) @ v.conj().T


def _doktorov_vacuum_column(params: DoktorovParams, dims: tuple[int, ...]) -> np.ndarray:
    """``U|0...0>`` as an amplitude tensor over the mode Fock basis."""
    zi, zf = params.squeeze_parameters()
    vec = np.zeros(dims, dtype=np.complex128)
    vec[(0,) * len(dims)] = 1.0
    for k in range(params.n_modes):
        if zi[k] != 0.0:
            vec = _apply_mode_matrix(vec, squeeze_matrix(dims[k], zi[k]), k)
    for i, j, theta in params.rotation_pairs():
        if theta == 0.0:
            continue
        rot = _rotation_unitary(dims, i, j, theta)
        merged = np.moveaxis(vec, (i, j), (0, 1))
        shape = merged.shape
        flat = merged.reshape(dims[i] * dims[j], -1)
        flat = rot @ flat
        vec = np.moveaxis(flat.reshape(shape), (0, 1), (i, j))
    for k in range(params.n_modes):
        if zf[k] != 0.0:
            vec = _apply_mode_matrix(vec, squeeze_matrix(dims[k], zf[k]).conj().T, k)
    for k in range(params.n_modes):
        if params.displacement[k] != 0.0:
            vec = _apply_mode_matrix(vec, displacement_matrix(dims[k], params.displacement[k]), k)
    return vec


def doktorov_build(register: ModeRegister, params: DoktorovParams) -> OperatorMatrix:
    """Full transition operator on the register (identity on the qubit)."""
    if params.n_modes != register.n_modes:
        raise ValueError("parameter mode count does not match the register")
    dims = tuple(m.dim for m in register.modes)
    zi, zf = params.squeeze_parameters()

    def lift(mat: np.ndarray, k: int) -> np.ndarray:
        left = int(np.prod(dims[:k], initial=1))
        right = int(np.prod(dims[k + 1:], initial=1))
        return np.kron(np.kron(np.eye(left), mat), np.eye(right))

    total = int(np.prod(dims))
    u = np.eye(total, dtype=np.complex128)
    for k in range(params.n_modes):
        u = lift(squeeze_matrix(dims[k], zi[k]), k) @ u
    for i, j, theta in params.rotation_pairs():
        ai = lift(mode_ladder(dims[i]).lower, i)
        aj = lift(mode_ladder(dims[j]).lower, j)
        gen = theta * (ai.conj().T @ aj - aj.conj().T @ ai)
        w, v = np.linalg.eigh(1j * gen)
        u = ((v * np.exp(-1j * w)) @ v.conj().T) @ u
    for k in range(params.n_modes):
        u = lift(squeeze_matrix(dims[k], zf[k]).conj().T, k) @ u
    for k in range(params.n_modes):
        u = lift(displacement_matrix(dims[k], params.displacement[k]), k) @ u
    return OperatorMatrix(register, np.kron(np.eye(2), u), hermitian=False)


def vibronic_fc(params: DoktorovParams, n_max: int = 29, dims: tuple[int, ...] | None = None) -> np.ndarray:
    """Joint Franck-Condon table ``|<n| U |0>|^2`` up to ``n_max`` per mode.

    ``dims`` sets the working truncation (default ``n_max + 1``); the table
    sums to one minus the truncation loss.
    """
    if dims is None:
        dims = (n_max + 1,) * params.n_modes
    if any(d < n_max + 1 for d in dims):
        raise ValueError("working dims must cover n_max")
    column = _doktorov_vacuum_column(params, tuple(dims))
    table = np.abs(column) ** 2
    return table[(slice(0, n_max + 1),) * params.n_modes].copy()


@dataclass(frozen=True)
class Spectrum:
    """Stick spectrum plus an optional Gaussian-broadened trace (cm^-1)."""

    stick_positions: np.ndarray
    stick_intensities: np.ndarray
    grid: np.ndarray | None = None
    broadened: np.ndarray | None = None


def vibronic_spectrum(
    fc_table: np.ndarray,
    final_freqs_cm1,
    broadening_cm1: float = 50.0,
    grid: np.ndarray | None = None,
) -> Spectrum:
    """Assemble the photoelectron stick spectrum and its broadened trace.

    Sticks sit at ``sum_i n_i w'_i`` relative to the 0-0 line with the
    Franck-Condon intensities; the broadened trace convolves them with a
    Gaussian of standard-deviation width ``broadening_cm1``.
    """
    if broadening_cm1 < 0:
        raise ValueError("broadening width must be >= 0")
    freqs = np.asarray(final_freqs_cm1, dtype=float)
    if fc_table.ndim != freqs.size:
        raise ValueError("table rank must match the number of final frequencies")
    grids = np.meshgrid(*[np.arange(d) for d in fc_table.shape], indexing="ij")
    positions = sum(g * f for g, f in zip(grids, freqs)).reshape(-1)
    intensities = fc_table.reshape(-1)
    order = np.argsort(positions, kind="stable")
    positions = positions[order]
    intensities = intensities[order]

    broadened = None
    if grid is None:
        top = positions[intensities > 1e-12].max(initial=0.0)
        grid = np.arange(-4 * broadening_cm1, top + 4 * broadening_cm1 + 1.0, 1.0)
    grid = np.asarray(grid, dtype=float)
    if broadening_cm1 > 0:
        diff = grid[:, None] - positions[None, :]
        kernel = np.exp(-0.5 * (diff / broadening_cm1) ** 2) / (
            broadening_cm1 * np.sqrt(2 * np.pi)
        )
        broadened = kernel @ intensities
    return Spectrum(positions, intensities, grid, broadened)


def vibronic_sample(
    fc_table: np.ndarray,
    rng: np.random.Generator,
    shots: int,
) -> np.ndarray:
    """Projective sampling of the joint table: counts with the table's shape.

    The table is renormalized over its truncated support before sampling.
    """
    flat = fc_table.reshape(-1)
    probs = flat / flat.sum()
    draws = rng.choice(flat.size, size=shots, p=probs)
    counts = np.bincount(draws, minlength=flat.size)
    return counts.reshape(fc_table.shape)
