"""Truncated Fock-space core: registers, states, and elementary operators.

A register is one qubit plus an ordered list of bosonic modes, each truncated
to ``dim`` Fock levels. Conventions used throughout the package:

* ``hbar = 1``; every Hamiltonian is expressed in angular-frequency units
  (rad/s). SI constants appear only in the coupling-coefficient helpers of
  :mod:`phonsim.hamiltonians`.
* Basis ordering is row-major with the qubit factor first, then the modes in
  declaration order: ``index = ravel(bit, n_1, ..., n_M)``. Qubit basis
  index 0 is the dark ground state ``|dn>``, index 1 the bright ``|up>``;
  with this ordering ``PAULI_Z |dn> = +|dn>``.
* Displacement convention: ``D(alpha) = exp(alpha a^dag - conj(alpha) a)``,
  squeeze convention ``S(z) = exp((conj(z) a^2 - z a^dag^2)/2)``. ``S(r)``
  with real ``r > 0`` squeezes the position quadrature ``x = (a+a^dag)/sqrt2``.

States and operator wrappers are immutable; the wrapped numpy arrays are
marked read-only. All functions here are pure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "DEFAULT_LEAKAGE_TOL",
    "LeakageError",
    "RegisterMismatchError",
    "ModeSpec",
    "QubitSpec",
    "ModeRegister",
    "HybridState",
    "OperatorMatrix",
    "LadderOps",
    "mode_ladder",
    "embed",
    "qubit_operator",
    "displacement_matrix",
    "squeeze_matrix",
    "apply_mode_unitary",
    "make_state",
    "vacuum_state",
    "fock_state",
    "coherent_state",
    "squeezed_state",
    "thermal_sample_state",
    "state_from_amplitudes",
    "thermal_weights",
    "expectation",
    "fidelity",
    "phonon_distribution",
    "qubit_populations",
    "leakage",
    "check_leakage",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "PROJ_UP",
    "PROJ_DOWN",
]

#: Default ceiling on the population allowed in the top two Fock levels of a
#: mode before propagation and state constructors refuse to continue.
DEFAULT_LEAKAGE_TOL = 1e-6

_NORM_TOL = 1e-12
_HERM_TOL = 1e-12


class LeakageError(RuntimeError):
    """Raised when truncation leakage exceeds the configured threshold."""


class RegisterMismatchError(ValueError):
    """Raised when states/operators from different registers are combined."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _frozen_array(values, dtype=np.complex128) -> np.ndarray:
    return _readonly(np.ascontiguousarray(values, dtype=dtype))


# Qubit-factor operators in the (|dn>, |up>) basis.
PAULI_X = _frozen_array([[0, 1], [1, 0]])
PAULI_Y = _frozen_array([[0, 1j], [-1j, 0]])
PAULI_Z = _frozen_array([[1, 0], [0, -1]])
SIGMA_PLUS = _frozen_array([[0, 0], [1, 0]])   # |up><dn|
SIGMA_MINUS = _frozen_array([[0, 1], [0, 0]])  # |dn><up|
PROJ_DOWN = _frozen_array([[1, 0], [0, 0]])
PROJ_UP = _frozen_array([[0, 0], [0, 1]])


@dataclass(frozen=True)
class ModeSpec:
    """One bosonic mode: angular frequency, Lamb-Dicke parameter, truncation.

    ``dim`` Fock levels ``0 .. dim-1`` are kept. A warning is emitted when
    ``lamb_dicke * dim**2 >= 1`` since the first-order sideband Hamiltonians
    assume the Lamb-Dicke regime over the populated levels.
    """

    frequency: float
    lamb_dicke: float
    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"mode dim must be >= 2, got {self.dim}")
        if not self.frequency > 0:
            raise ValueError("mode frequency must be positive")
        if not 0 < self.lamb_dicke < 1:
            raise ValueError("lamb_dicke must lie in (0, 1)")
        if self.lamb_dicke * self.dim**2 >= 1:
            warnings.warn(
                "lamb_dicke * dim^2 >= 1: sideband couplings are not reliable "
                "over the whole truncated ladder",
                stacklevel=2,
            )


@dataclass(frozen=True)
class QubitSpec:
    """Internal qubit. The splitting is bookkeeping only: all dynamics are
    built in the interaction picture, so it never enters a Hamiltonian."""

    splitting: float = 0.0

    def __post_init__(self):
        if self.splitting < 0:
            raise ValueError("qubit splitting must be >= 0")


@dataclass(frozen=True)
class ModeRegister:
    """Qubit plus ordered modes; fixes the basis bijection for the package.

    Total dimension is ``2 * prod(dims)``. Index layout is row-major with the
    qubit first: ``index(bit, ns) = ravel_multi_index((bit, *ns), dims)``.
    """

    qubit: QubitSpec
    modes: tuple[ModeSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("register needs at least one mode")

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) + tuple(m.dim for m in self.modes)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def index(self, bit: int, ns: Sequence[int]) -> int:
        return int(np.ravel_multi_index((bit, *ns), self.dims))

    def unindex(self, index: int) -> tuple[int, ...]:
        return tuple(int(x) for x in np.unravel_index(index, self.dims))

    def axis(self, slot) -> int:
        """Map ``'qubit'`` or a mode index to the tensor axis."""
        if slot == "qubit":
            return 0
        slot = int(slot)
        if not 0 <= slot < self.n_modes:
            raise ValueError(f"mode index {slot} out of range")
        return slot + 1


def _check_same_register(a, b):
    if a.register is not b.register and a.register != b.register:
        raise RegisterMismatchError("objects belong to different registers")


@dataclass(frozen=True)
class HybridState:
    """Normalized amplitude vector over the qubit (x) Fock basis."""

    register: ModeRegister
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != self.register.dim:
            raise ValueError(
                f"amplitude length {amps.shape[0]} != register dim {self.register.dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state not normalized: |norm-1| = {abs(norm - 1.0):.3e}")
        if abs(norm - 1.0) > _NORM_TOL:
            amps = amps / norm
        object.__setattr__(self, "amplitudes", _readonly(np.ascontiguousarray(amps)))

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to ``(2, d_1, ..., d_M)`` (read-only view)."""
        return self.amplitudes.reshape(self.register.dims)

    def overlap(self, other: "HybridState") -> complex:
        _check_same_register(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on the full register, with an optional hermitian tag.

    The hermitian flag is trusted by the propagators, so it is verified here:
    ``max|M - M^dag| < 1e-12`` must hold when the flag is set.
    """

    register: ModeRegister
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        d = self.register.dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} != ({d}, {d})")
        if self.hermitian:
            dev = np.max(np.abs(mat - mat.conj().T))
            if dev > _HERM_TOL:
                raise ValueError(f"hermitian flag set but max|M - M^dag| = {dev:.3e}")
        object.__setattr__(self, "matrix", _readonly(np.ascontiguousarray(mat)))

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_register(self, other)
        return OperatorMatrix(
            self.register,
            self.matrix + other.matrix,
            hermitian=self.hermitian and other.hermitian,
        )

    def __mul__(self, scalar) -> "OperatorMatrix":
        herm = self.hermitian and np.isreal(scalar)
        return OperatorMatrix(self.register, self.matrix * scalar, hermitian=bool(herm))

    __rmul__ = __mul__

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.register, self.matrix.conj().T, hermitian=self.hermitian)

    def apply(self, state: HybridState) -> np.ndarray:
        """Raw matrix-vector product (not normalized)."""
        _check_same_register(self, state)
        return self.matrix @ state.amplitudes


class LadderOps(NamedTuple):
    lower: np.ndarray
    raise_: np.ndarray
    number: np.ndarray
    parity: np.ndarray


def mode_ladder(dim: int) -> LadderOps:
    """Single-mode ladder operators on a ``dim``-level truncation.

    ``raise_[n+1, n] = sqrt(n+1)`` for ``n < dim-1`` and ``lower = raise_^dag``.
    On the truncated space ``[lower, raise_]`` equals the identity except in
    the top level, where the missing ``raise_`` column gives ``-(dim-1)``.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    n = np.arange(1, dim)
    raise_ = np.zeros((dim, dim), dtype=np.complex128)
    raise_[n, n - 1] = np.sqrt(n)
    lower = raise_.conj().T.copy()
    number = np.diag(np.arange(dim).astype(np.complex128))
    parity = np.diag(((-1.0) ** np.arange(dim)).astype(np.complex128))
    return LadderOps(*(map(_readonly, (lower, raise_, number, parity))))


def qubit_operator(name: str) -> np.ndarray:
    """Named 2x2 qubit-factor operator (``x``, ``y``, ``z``, ``+``, ``-``,
    ``proj_up``, ``proj_dn``)."""
    table = {
        "x": PAULI_X,
        "y": PAULI_Y,
        "z": PAULI_Z,
        "+": SIGMA_PLUS,
        "-": SIGMA_MINUS,
        "proj_up": PROJ_UP,
        "proj_dn": PROJ_DOWN,
    }
    try:
        return table[name]
    except KeyError:
        raise ValueError(f"unknown qubit operator {name!r}") from None


def embed(op: np.ndarray, slot, register: ModeRegister, hermitian: bool | None = None) -> OperatorMatrix:
    """Lift a single-factor matrix into the full register.

    ``slot`` is ``'qubit'`` or a mode index; the result is
    ``I (x) ... (x) op (x) ... (x) I`` in the declared ordering.
    """
    axis = register.axis(slot)
    dims = register.dims
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (dims[axis], dims[axis]):
        raise ValueError(
            f"operator shape {op.shape} does not match slot dimension {dims[axis]}"
        )
    left = int(np.prod(dims[:axis], initial=1))
    right = int(np.prod(dims[axis + 1:], initial=1))
    full = np.kron(np.kron(np.eye(left), op), np.eye(right))
    if hermitian is None:
        hermitian = bool(np.max(np.abs(op - op.conj().T)) <= _HERM_TOL)
    return OperatorMatrix(register, full, hermitian=hermitian)


def _unitary_from_generator(herm: np.ndarray) -> np.ndarray:
    """``exp(-i H)`` for hermitian ``H`` via eigendecomposition."""
    w, v = np.linalg.eigh(herm)
    return (v * np.exp(-1j * w)) @ v.conj().T


def displacement_matrix(dim: int, alpha: complex) -> np.ndarray:
    """``D(alpha) = exp(alpha a^dag - conj(alpha) a)`` on ``dim`` levels."""
    ops = mode_ladder(dim)
    gen = 1j * (alpha * ops.raise_ - np.conj(alpha) * ops.lower)  # -i*gen = alpha a^dag - ...
    return _unitary_from_generator(gen)


def squeeze_matrix(dim: int, z: complex) -> np.ndarray:
    """``S(z) = exp((conj(z) a^2 - z a^dag^2)/2)`` on ``dim`` levels."""
    ops = mode_ladder(dim)
    a2 = ops.lower @ ops.lower
    gen = 1j * 0.5 * (np.conj(z) * a2 - z * (a2.conj().T))
    return _unitary_from_generator(gen)


# ---------------------------------------------------------------------------
# state constructors


def _state(register: ModeRegister, vec: np.ndarray) -> HybridState:
    vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return HybridState(register, vec / nrm)


def vacuum_state(register: ModeRegister) -> HybridState:
    vec = np.zeros(register.dim, dtype=np.complex128)
    vec[0] = 1.0
    return HybridState(register, vec)


def fock_state(register: ModeRegister, ns: Sequence[int], bit: int = 0) -> HybridState:
    """``|bit, n_1, ..., n_M>``. Raises if any ``n`` hits the truncation."""
    ns = tuple(int(n) for n in ns)
    if len(ns) != register.n_modes:
        raise ValueError("need one occupation per mode")
    for n, mode in zip(ns, register.modes):
        if not 0 <= n < mode.dim:
            raise ValueError(f"Fock level {n} outside truncation 0..{mode.dim - 1}")
    vec = np.zeros(register.dim, dtype=np.complex128)
    vec[register.index(bit, ns)] = 1.0
    return HybridState(register, vec)


def _apply_mode_matrix(register: ModeRegister, state_vec: np.ndarray, mat: np.ndarray, mode: int) -> np.ndarray:
    axis = register.axis(mode)
    tens = state_vec.reshape(register.dims)
    tens = np.moveaxis(np.tensordot(mat, tens, axes=([1], [axis])), 0, axis)
    return tens.reshape(-1)


def apply_mode_unitary(state: HybridState, mode: int, matrix: np.ndarray) -> HybridState:
    """Apply a single-mode unitary to one mode of the state (no leakage check)."""
    mat = np.asarray(matrix, dtype=np.complex128)
    dim = state.register.modes[mode].dim
    if mat.shape != (dim, dim):
        raise ValueError(f"matrix shape {mat.shape} does not match mode dim {dim}")
    vec = _apply_mode_matrix(state.register, state.amplitudes, mat, mode)
    return _state(state.register, vec)


def coherent_state(
    register: ModeRegister,
    alphas: Sequence[complex],
    bit: int = 0,
    leakage_tol: float = DEFAULT_LEAKAGE_TOL,
) -> HybridState:
    """Product of coherent states, built by displacing the vacuum."""
    alphas = tuple(alphas)
    if len(alphas) != register.n_modes:
        raise ValueError("need one amplitude per mode")
    vec = fock_state(register, (0,) * register.n_modes, bit=bit).amplitudes.copy()
    for k, (alpha, mode) in enumerate(zip(alphas, register.modes)):
        if alpha != 0:
            vec = _apply_mode_matrix(register, vec, displacement_matrix(mode.dim, alpha), k)
    return check_leakage(_state(register, vec), leakage_tol)


def squeezed_state(
    register: ModeRegister,
    zs: Sequence[complex],
    bit: int = 0,
    leakage_tol: float = DEFAULT_LEAKAGE_TOL,
) -> HybridState:
    """Product of squeezed vacuums ``S(z)|0>`` per mode."""
    zs = tuple(zs)
    if len(zs) != register.n_modes:
        raise ValueError("need one squeeze parameter per mode")
    vec = fock_state(register, (0,) * register.n_modes, bit=bit).amplitudes.copy()
    for k, (z, mode) in enumerate(zip(zs, register.modes)):
        if z != 0:
            vec = _apply_mode_matrix(register, vec, squeeze_matrix(mode.dim, z), k)
    return check_leakage(_state(register, vec), leakage_tol)


def thermal_weights(nbar: float, dim: int) -> np.ndarray:
    """Boltzmann weights of a thermal mode, renormalized on the truncation."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if nbar == 0:
        w = np.zeros(dim)
        w[0] = 1.0
        return w
    ratio = nbar / (1.0 + nbar)
    w = ratio ** np.arange(dim)
    return w / w.sum()


def thermal_sample_state(
    register: ModeRegister,
    nbars: Sequence[float],
    rng: np.random.Generator,
    bit: int = 0,
) -> HybridState:
    """One Fock state drawn from the product of thermal distributions.

    Thermal mixtures are handled by trajectory sampling: average observables
    over many draws. Use :func:`thermal_weights` for exact diagonal averaging.
    """
    nbars = tuple(nbars)
    if len(nbars) != register.n_modes:
        raise ValueError("need one nbar per mode")
    ns = tuple(
        int(rng.choice(mode.dim, p=thermal_weights(nbar, mode.dim)))
        for nbar, mode in zip(nbars, register.modes)
    )
    return fock_state(register, ns, bit=bit)


def state_from_amplitudes(register: ModeRegister, values) -> HybridState:
    return _state(register, np.asarray(values, dtype=np.complex128))


def make_state(register: ModeRegister, kind: str, **kwargs) -> HybridState:
    """String-dispatch constructor used by config-driven callers.

    ``kind`` is one of ``vacuum``, ``fock``, ``coherent``, ``squeezed``,
    ``thermal``, ``amplitudes``; keyword arguments are forwarded.
    """
    builders = {
        "vacuum": vacuum_state,
        "fock": fock_state,
        "coherent": coherent_state,
        "squeezed": squeezed_state,
        "thermal": thermal_sample_state,
        "amplitudes": state_from_amplitudes,
    }
    try:
        builder = builders[kind]
    except KeyError:
        raise ValueError(f"unknown state kind {kind!r}") from None
    return builder(register, **kwargs)


# ---------------------------------------------------------------------------
# expectations and diagnostics


def expectation(state: HybridState, op: OperatorMatrix):
    """``<psi|M|psi>``; real for hermitian operators (checked to 1e-10)."""
    _check_same_register(state, op)
    val = complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))
    if op.hermitian:
        scale = max(1.0, abs(val))
        if abs(val.imag) > 1e-10 * scale:
            raise ValueError(f"hermitian expectation has imaginary part {val.imag:.3e}")
        return val.real
    return val


def fidelity(a: HybridState, b: HybridState) -> float:
    """``|<a|b>|^2``."""
    return abs(a.overlap(b)) ** 2


def phonon_distribution(state: HybridState, mode: int) -> np.ndarray:
    """Marginal Fock-level probabilities of one mode."""
    axis = state.register.axis(mode)
    probs = np.abs(state.tensor_view()) ** 2
    other = tuple(i for i in range(len(state.register.dims)) if i != axis)
    return probs.sum(axis=other)


def qubit_populations(state: HybridState) -> np.ndarray:
    """``(P_dn, P_up)``."""
    probs = np.abs(state.tensor_view()) ** 2
    return probs.sum(axis=tuple(range(1, len(state.register.dims))))


def leakage(state: HybridState) -> float:
    """Worst-mode population in the top two Fock levels.

    This is the truncation guard: any amplitude reaching the top of a ladder
    means the physical (untruncated) dynamics is no longer represented. The
    ground level is never counted, so a dim-2 mode is judged by its top level
    alone.
    """
    worst = 0.0
    for k, mode in enumerate(state.register.modes):
        p = phonon_distribution(state, k)
        worst = max(worst, float(p[max(1, mode.dim - 2):].sum()))
    return worst


def check_leakage(state: HybridState, tol: float = DEFAULT_LEAKAGE_TOL) -> HybridState:
    """Pass the state through, raising :class:`LeakageError` above ``tol``."""
    amount = leakage(state)
    if amount > tol:
        raise LeakageError(
            f"truncation leakage {amount:.3e} exceeds threshold {tol:.1e}; "
            "increase mode dims or raise the threshold explicitly"
        )
    return state
