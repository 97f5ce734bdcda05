"""Interaction-picture Hamiltonian builders for the hybrid register.

Every builder returns an :class:`~phonsim.hilbert.OperatorMatrix` in
angular-frequency units (``hbar = 1``). Frame conventions, fixed once here:

* Laser-drive detunings enter as ``-detuning * |up><up|``; a positive
  detuning puts the drive above the addressed transition.
* Parametric-coupling detunings sit on the *higher-frequency* mode
  (``detuning * n_a`` for the two-mode degenerate coupling, ``detuning * n_h``
  for the three-mode coupling).
* Spin-conditioned Gaussian generators follow
  ``rate * (mode term) * sigma_axis``; evolving for time ``t`` gives a
  displacement of magnitude ``alpha_rate * t`` and a squeeze parameter
  ``r = 2 * zeta_rate * t``.

SI physical constants appear only in the coupling-coefficient helpers at the
bottom of the module, which take a :class:`TrapGeometry` and return rates in
rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants as _const

from .hilbert import (
    ModeRegister,
    OperatorMatrix,
    PAULI_X,
    PAULI_Z,
    PROJ_UP,
    SIGMA_MINUS,
    SIGMA_PLUS,
    embed,
    mode_ladder,
)

__all__ = [
    "DriveParams",
    "CouplingParams",
    "TrapGeometry",
    "YB171_MASS",
    "carrier",
    "sideband",
    "spin_displacement",
    "spin_squeeze",
    "mode_rotation",
    "local_hopping",
    "dipole_dipole",
    "cbs",
    "cbs_duration",
    "degenerate_parametric",
    "trilinear",
    "coupling_xi_d",
    "coupling_xi_n",
    "cross_kerr_shift",
    "dipole_dipole_rate",
    "transverse_hopping_rate",
    "squeeze_rate_estimate",
    "beamsplitter_rate_estimate",
]

#: Mass of a single 171Yb+ ion in kg.
YB171_MASS = 170.9363258 * _const.atomic_mass


@dataclass(frozen=True)
class DriveParams:
    """Laser drive: Rabi frequency, optical phase, detuning (all rad-based)."""

    rabi: float
    phase: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError("rabi must be >= 0")


@dataclass(frozen=True)
class CouplingParams:
    """Mode-mode coupling: strength, phase, and frame detuning (rad/s)."""

    strength: float
    phase: float = 0.0
    detuning: float = 0.0


def _pair(register: ModeRegister, half: np.ndarray) -> OperatorMatrix:
    """Hermitian operator ``half + half^dag`` (exact hermiticity)."""
    return OperatorMatrix(register, half + half.conj().T, hermitian=True)


def _mode_op(register: ModeRegister, mat: np.ndarray, mode: int) -> np.ndarray:
    return embed(mat, mode, register).matrix


def _qubit_op(register: ModeRegister, mat: np.ndarray) -> np.ndarray:
    return embed(mat, "qubit", register).matrix


def _detuning_term(register: ModeRegister, detuning: float) -> np.ndarray:
    if detuning == 0.0:
        return 0.0
    return -detuning * _qubit_op(register, PROJ_UP)


# ---------------------------------------------------------------------------
# qubit-mode drives


def carrier(register: ModeRegister, rabi: float, phase: float = 0.0, detuning: float = 0.0) -> OperatorMatrix:
    """Carrier drive ``(rabi/2)(sp e^{i phase} + sm e^{-i phase})``.

    Acts as the identity on every mode. A pi pulse takes ``t = pi/rabi``.
    """
    half = 0.5 * rabi * np.exp(1j * phase) * _qubit_op(register, SIGMA_PLUS)
    h = half + half.conj().T + _detuning_term(register, detuning)
    return OperatorMatrix(register, h, hermitian=True)


def sideband(
    register: ModeRegister,
    mode: int,
    kind: str = "blue",
    rabi: float = 0.0,
    order: int = 1,
    phase: float = 0.0,
    detuning: float = 0.0,
) -> OperatorMatrix:
    """First or second motional sideband of one mode.

    Blue, order 1: ``(i eta rabi / 2)(sp a^dag e^{i phase} - sm a e^{-i phase})``,
    coupling ``|dn,n> <-> |up,n+1>`` so the population oscillates at the
    angular frequency ``sqrt(n+1) * eta * rabi``. Order 2 uses ``eta^2`` and
    ``a^dag^2``. The red sideband exchanges the qubit operators.
    """
    if order not in (1, 2):
        raise ValueError(f"sideband order must be 1 or 2, got {order}")
    if kind not in ("blue", "red"):
        raise ValueError(f"kind must be 'blue' or 'red', got {kind!r}")
    eta = register.modes[mode].lamb_dicke
    strength = eta**order * rabi
    ladder = mode_ladder(register.modes[mode].dim)
    up = np.linalg.matrix_power(ladder.raise_, order)
    spin = SIGMA_PLUS if kind == "blue" else SIGMA_MINUS
    half = (0.5j * strength * np.exp(1j * phase)) * (
        _qubit_op(register, spin) @ _mode_op(register, up, mode)
    )
    h = half + half.conj().T + _detuning_term(register, detuning)
    return OperatorMatrix(register, h, hermitian=True)


def spin_displacement(
    register: ModeRegister,
    mode: int,
    alpha_rate: float,
    phase: float = 0.0,
    axis: str = "x",
) -> OperatorMatrix:
    """Spin-conditioned displacement drive of one mode.

    Generator ``alpha_rate (a^dag e^{i phase} + a e^{-i phase}) sigma_axis``.
    With the qubit in a ``sigma_axis`` eigenstate the mode undergoes a pure
    displacement of magnitude ``alpha_rate * t``; opposite eigenstates are
    displaced with opposite sign.
    """
    if axis not in ("x", "z"):
        raise ValueError("axis must be 'x' or 'z'")
    pauli = PAULI_X if axis == "x" else PAULI_Z
    ladder = mode_ladder(register.modes[mode].dim)
    half = (alpha_rate * np.exp(1j * phase)) * (
        _mode_op(register, ladder.raise_, mode) @ _qubit_op(register, pauli)
    )
    return _pair(register, half)


def spin_squeeze(
    register: ModeRegister,
    mode: int,
    zeta_rate: float,
    phase: float = 0.0,
) -> OperatorMatrix:
    """Spin-conditioned squeezing drive of one mode.

    Generator ``zeta_rate (a^dag^2 e^{i phase} + a^2 e^{-i phase}) sigma_z``.
    Evolving the vacuum for time ``t`` yields a squeezed vacuum with squeeze
    parameter ``r = 2 zeta_rate t`` and support on even Fock levels only.
    """
    ladder = mode_ladder(register.modes[mode].dim)
    up2 = ladder.raise_ @ ladder.raise_
    half = (zeta_rate * np.exp(1j * phase)) * (
        _mode_op(register, up2, mode) @ _qubit_op(register, PAULI_Z)
    )
    return _pair(register, half)


def mode_rotation(
    register: ModeRegister,
    mode_i: int,
    mode_j: int,
    theta_rate: float,
    phase: float = 0.0,
) -> OperatorMatrix:
    """Spin-conditioned beam-splitter between two modes.

    Generator ``theta_rate (a_i^dag a_j e^{i phase} + a_i a_j^dag e^{-i phase})
    sigma_z``; conserves the total phonon number of the pair. ``theta_rate*t =
    pi/4`` is a 50:50 splitter, ``pi/2`` a full swap.
    """
    if mode_i == mode_j:
        raise ValueError("mode_rotation needs two distinct modes")
    li = mode_ladder(register.modes[mode_i].dim)
    lj = mode_ladder(register.modes[mode_j].dim)
    half = (theta_rate * np.exp(1j * phase)) * (
        _mode_op(register, li.raise_, mode_i)
        @ _mode_op(register, lj.lower, mode_j)
        @ _qubit_op(register, PAULI_Z)
    )
    return _pair(register, half)


# ---------------------------------------------------------------------------
# mode-mode couplings


def local_hopping(
    register: ModeRegister,
    kappa: np.ndarray,
    site_shifts=None,
    blockade_shifts=None,
) -> OperatorMatrix:
    """Local-mode hopping ``sum_i nu_i n_i + sum_{i!=j} kappa_ij a_i^dag a_j``.

    ``kappa`` must be symmetric with zero diagonal (rad/s). ``site_shifts``
    are the per-site frequency offsets ``nu_i`` in the rotating frame of the
    common trap frequency; ``blockade_shifts`` add onto them, modelling a
    drive-induced blockade as a large site detuning.
    """
    m = register.n_modes
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape != (m, m):
        raise ValueError(f"kappa must be {m}x{m}")
    if np.max(np.abs(kappa - kappa.T)) > 0:
        raise ValueError("kappa must be symmetric")
    if np.max(np.abs(np.diag(kappa))) > 0:
        raise ValueError("kappa must have zero diagonal")
    nu = np.zeros(m) if site_shifts is None else np.asarray(site_shifts, dtype=float)
    if blockade_shifts is not None:
        nu = nu + np.asarray(blockade_shifts, dtype=float)

    h = np.zeros((register.dim, register.dim), dtype=np.complex128)
    ladders = [mode_ladder(mode.dim) for mode in register.modes]
    for i in range(m):
        if nu[i] != 0:
            h += nu[i] * _mode_op(register, ladders[i].number, i)
    for i in range(m):
        for j in range(i + 1, m):
            if kappa[i, j] != 0:
                half = kappa[i, j] * (
                    _mode_op(register, ladders[i].raise_, i)
                    @ _mode_op(register, ladders[j].lower, j)
                )
                h += half + half.conj().T
    return OperatorMatrix(register, h, hermitian=True)


def dipole_dipole(register: ModeRegister, mode_i: int, mode_j: int, rate: float) -> OperatorMatrix:
    """Resonant dipole-dipole exchange ``-(rate/2)(a_i a_j^dag + a_i^dag a_j)``
    between two local modes (rotating-wave form)."""
    if mode_i == mode_j:
        raise ValueError("dipole_dipole needs two distinct modes")
    li = mode_ladder(register.modes[mode_i].dim)
    lj = mode_ladder(register.modes[mode_j].dim)
    half = -0.5 * rate * (
        _mode_op(register, li.raise_, mode_i) @ _mode_op(register, lj.lower, mode_j)
    )
    return _pair(register, half)


def cbs(
    register: ModeRegister,
    mode_i: int,
    mode_j: int,
    strength: float,
    phase: float = 0.0,
    control_level: int = 1,
) -> OperatorMatrix:
    """Controlled beam-splitter: exchange of two modes gated by one qubit level.

    ``strength * |c><c| (a_i^dag a_j e^{i phase} + a_i a_j^dag e^{-i phase})``
    with ``c`` the controlling qubit basis state (default the upper level).
    Applying it for ``cbs_duration(strength)`` swaps the mode contents in the
    controlled block with a ``(-i)^(n+m)`` phase and leaves the other block
    untouched; two consecutive applications at ``phase = 0`` act as the parity
    of the total pair occupation in the controlled block.
    """
    if mode_i == mode_j:
        raise ValueError("cbs needs two distinct modes")
    if control_level not in (0, 1):
        raise ValueError("control_level must be a qubit basis index (0 or 1)")
    proj = np.zeros((2, 2), dtype=np.complex128)
    proj[control_level, control_level] = 1.0
    li = mode_ladder(register.modes[mode_i].dim)
    lj = mode_ladder(register.modes[mode_j].dim)
    half = (strength * np.exp(1j * phase)) * (
        _qubit_op(register, proj)
        @ _mode_op(register, li.raise_, mode_i)
        @ _mode_op(register, lj.lower, mode_j)
    )
    return _pair(register, half)


def cbs_duration(strength: float) -> float:
    """Gate time ``pi / (2 strength)`` of the controlled beam-splitter."""
    if strength <= 0:
        raise ValueError("strength must be positive")
    return np.pi / (2.0 * strength)


def degenerate_parametric(
    register: ModeRegister,
    mode_a: int,
    mode_b: int,
    strength: float,
    detuning: float = 0.0,
) -> OperatorMatrix:
    """Degenerate parametric coupling: one ``a`` phonon <-> two ``b`` phonons.

    ``detuning * n_a + strength (a b^dag^2 + a^dag b^2)`` with the detuning
    ``omega_a - 2 omega_b`` assigned to the higher-frequency mode ``a``.
    Conserves ``2 n_a + n_b``.
    """
    if mode_a == mode_b:
        raise ValueError("degenerate_parametric needs two distinct modes")
    la = mode_ladder(register.modes[mode_a].dim)
    lb = mode_ladder(register.modes[mode_b].dim)
    down2 = lb.lower @ lb.lower
    half = strength * (
        _mode_op(register, la.raise_, mode_a) @ _mode_op(register, down2, mode_b)
    )
    h = half + half.conj().T
    if detuning != 0.0:
        h = h + detuning * _mode_op(register, la.number, mode_a)
    return OperatorMatrix(register, h, hermitian=True)


def trilinear(
    register: ModeRegister,
    mode_h: int,
    mode_w: int,
    mode_c: int,
    strength: float,
    detuning: float = 0.0,
) -> OperatorMatrix:
    """Nondegenerate (three-mode) parametric coupling.

    ``detuning * n_h + strength (a_h^dag a_w a_c + a_h a_w^dag a_c^dag)``;
    conserves both ``n_h + n_w`` and ``n_h + n_c``. Resonant when the mode
    frequencies satisfy ``omega_h = omega_w + omega_c`` (detuning zero).
    """
    if len({mode_h, mode_w, mode_c}) != 3:
        raise ValueError("trilinear needs three distinct modes")
    lh = mode_ladder(register.modes[mode_h].dim)
    lw = mode_ladder(register.modes[mode_w].dim)
    lc = mode_ladder(register.modes[mode_c].dim)
    half = strength * (
        _mode_op(register, lh.raise_, mode_h)
        @ _mode_op(register, lw.lower, mode_w)
        @ _mode_op(register, lc.lower, mode_c)
    )
    h = half + half.conj().T
    if detuning != 0.0:
        h = h + detuning * _mode_op(register, lh.number, mode_h)
    return OperatorMatrix(register, h, hermitian=True)


# ---------------------------------------------------------------------------
# cross-Kerr shift


def cross_kerr_shift(
    strength: float,
    detuning: float,
    n_b: int,
    method: str = "perturbative",
    dims: tuple[int, int] | None = None,
) -> float:
    """Frequency shift of the ``a``-mode transition per ``b``-mode occupation.

    ``perturbative`` evaluates the closed form
    ``-2 (2 n_b + 1) strength^2 / detuning`` (valid for
    ``|detuning| >> strength``). ``exact`` diagonalizes the two-mode coupling
    at the given truncation and returns the dressed ``|0_a,n_b> -> |1_a,n_b>``
    transition shift, reported with the same sign convention as the closed
    form.
    """
    if n_b < 0:
        raise ValueError("n_b must be >= 0")
    if strength == 0.0:
        return 0.0
    if method == "perturbative":
        if detuning == 0.0:
            raise ValueError("perturbative shift is undefined at zero detuning")
        return -2.0 * (2 * n_b + 1) * strength**2 / detuning
    if method != "exact":
        raise ValueError("method must be 'perturbative' or 'exact'")

    da, db = dims if dims is not None else (6, n_b + 10)
    if n_b >= db - 2:
        raise ValueError("b-mode truncation too small for requested n_b")
    la = mode_ladder(da)
    lb = mode_ladder(db)
    ident_a = np.eye(da)
    ident_b = np.eye(db)
    a_low = np.kron(la.lower, ident_b)
    b_low = np.kron(ident_a, lb.lower)
    num_a = np.kron(la.number, ident_b)
    h = detuning * num_a + strength * (
        a_low.conj().T @ b_low @ b_low + a_low @ b_low.conj().T @ b_low.conj().T
    )
    w, v = np.linalg.eigh(h)

    def dressed_energy(na):
        idx = na * db + n_b
        k = int(np.argmax(np.abs(v[idx, :]) ** 2))
        return w[k]

    return -((dressed_energy(1) - dressed_energy(0)) - detuning)


# ---------------------------------------------------------------------------
# trap geometry and SI coupling coefficients


@dataclass(frozen=True)
class TrapGeometry:
    """Linear-trap parameters for the anharmonic-coupling coefficients.

    ``secular_x/y/z`` are single-ion secular frequencies (rad/s) with axial
    crystallization requiring ``secular_z < min(secular_x, secular_y)``.
    """

    ion_mass: float
    ion_charge: float
    secular_x: float
    secular_y: float
    secular_z: float

    def __post_init__(self):
        if self.ion_mass <= 0 or self.ion_charge <= 0:
            raise ValueError("ion mass and charge must be positive")
        if not self.secular_z < min(self.secular_x, self.secular_y):
            raise ValueError("axial crystallization requires secular_z < secular_x,y")

    @property
    def z0(self) -> float:
        """Equilibrium ion spacing ``(5 e^2 / 16 pi eps0 M wz^2)^(1/3)`` (m)."""
        num = 5.0 * self.ion_charge**2
        den = 16.0 * np.pi * _const.epsilon_0 * self.ion_mass * self.secular_z**2
        return float((num / den) ** (1.0 / 3.0))

    # two-ion out-of-phase modes
    @property
    def pair_stretch(self) -> float:
        """Axial stretch frequency ``sqrt(3) wz`` of two co-trapped ions."""
        return float(np.sqrt(3.0) * self.secular_z)

    @property
    def pair_rocking(self) -> float:
        """Radial rocking frequency ``sqrt(wx^2 - wz^2)`` of two ions."""
        return float(np.sqrt(self.secular_x**2 - self.secular_z**2))

    # three-ion modes entering the three-mode resonance
    @property
    def trio_axial_zigzag(self) -> float:
        """Axial zigzag frequency ``sqrt(29/5) wz`` of three ions."""
        return float(np.sqrt(29.0 / 5.0) * self.secular_z)

    @property
    def trio_radial_tilt(self) -> float:
        return float(np.sqrt(self.secular_x**2 - self.secular_z**2))

    @property
    def trio_radial_zigzag(self) -> float:
        val = self.secular_x**2 - 12.0 * self.secular_z**2 / 5.0
        if val <= 0:
            raise ValueError("radial zigzag mode unstable for this geometry")
        return float(np.sqrt(val))


def coupling_xi_d(geometry: TrapGeometry) -> float:
    """Two-ion degenerate parametric rate
    ``(1/8 z0) sqrt(hbar wa^3 / (M wb^2))`` in rad/s, with ``wa`` the axial
    stretch and ``wb`` the radial rocking mode."""
    wa = geometry.pair_stretch
    wb = geometry.pair_rocking
    return float(
        np.sqrt(_const.hbar * wa**3 / (geometry.ion_mass * wb**2)) / (8.0 * geometry.z0)
    )


def coupling_xi_n(geometry: TrapGeometry) -> float:
    """Three-ion trilinear rate
    ``9 wz^2 sqrt(hbar / (M wh ww wc)) / (5 z0)`` in rad/s, with the trio
    zigzag/tilt mode frequencies. The single-phonon exchange
    ``|1,0,0> <-> |0,1,1>`` then oscillates at ``xi_n / pi`` Hz."""
    wh = geometry.trio_axial_zigzag
    ww = geometry.trio_radial_tilt
    wc = geometry.trio_radial_zigzag
    root = np.sqrt(_const.hbar / (geometry.ion_mass * wh * ww * wc))
    return float(9.0 * geometry.secular_z**2 * root / (5.0 * geometry.z0))


def dipole_dipole_rate(
    charge_1: float,
    charge_2: float,
    separation: float,
    mass_1: float,
    mass_2: float,
    freq_1: float,
    freq_2: float,
) -> float:
    """Axial dipole-dipole rate
    ``q1 q2 / (2 pi eps0 r^3 sqrt(M1 M2 w1 w2))`` in rad/s."""
    return float(
        charge_1
        * charge_2
        / (
            2.0
            * np.pi
            * _const.epsilon_0
            * separation**3
            * np.sqrt(mass_1 * mass_2 * freq_1 * freq_2)
        )
    )


def transverse_hopping_rate(charge: float, mass: float, frequency: float, distance: float) -> float:
    """Transverse local-mode hopping rate ``q^2 / (8 pi eps0 M w d^3)`` in
    rad/s (half the axial dipole-dipole rate for equal ions)."""
    return float(
        charge**2 / (8.0 * np.pi * _const.epsilon_0 * mass * frequency * distance**3)
    )


def squeeze_rate_estimate(eta: float, rabi: float, delta_1: float, mode_frequency: float) -> float:
    """Raman squeezing rate from the three-denominator sum
    ``(eta^2 rabi^2 / 8)(1/d1 - 2/(d1 - w) + 1/(d1 - 2w))``.

    Implements the stated formula literally; its regime of validity (``d1``
    detuned a few ``eta*rabi`` from the sidebands) is not enforced here.
    """
    if delta_1 in (0.0, mode_frequency, 2.0 * mode_frequency):
        raise ValueError("delta_1 coincides with a resonance of the formula")
    s = 1.0 / delta_1 - 2.0 / (delta_1 - mode_frequency) + 1.0 / (delta_1 - 2.0 * mode_frequency)
    return float(eta**2 * rabi**2 / 8.0 * s)


def beamsplitter_rate_estimate(
    eta_i: float,
    eta_j: float,
    rabi_i: float,
    rabi_j: float,
    delta_1: float,
    freq_i: float,
    freq_j: float,
) -> float:
    """Raman beam-splitter rate ``eta_i eta_j rabi_i rabi_j / Delta_BS`` with
    ``1/Delta_BS = 1/(-d1) + 1/(-d1 + wi - wj) + 1/(d1 - wi) + 1/(d1 + wj)``.

    The stated four-denominator combination is implemented literally,
    including its sign conventions (``d1 = -w1 - dR`` in the originating
    drive arrangement); no attempt is made to re-derive it.
    """
    inv = (
        1.0 / (-delta_1)
        + 1.0 / (-delta_1 + freq_i - freq_j)
        + 1.0 / (delta_1 - freq_i)
        + 1.0 / (delta_1 + freq_j)
    )
    return float(eta_i * eta_j * rabi_i * rabi_j * inv)
