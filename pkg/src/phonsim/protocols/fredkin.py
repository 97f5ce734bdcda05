"""Fredkin (controlled-swap) truth table from a single controlled beam-splitter.

With both target modes restricted to zero or one phonon, the controlled
beam-splitter applied for its gate time acts as a Fredkin gate on the basis
``(control qubit, n_i, n_j)``: the mode values swap exactly when the control
occupies the gating level. Phases like the ``(-i)^(n+m)`` factor are
invisible in the measured populations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dynamics import eigenpropagator
from ..hamiltonians import cbs, cbs_duration
from ..hilbert import ModeRegister, fock_state

__all__ = ["TruthTable", "fredkin_truth_table"]


@dataclass(frozen=True)
class TruthTable:
    """Outcome probabilities ``matrix[input, output]`` over the labelled basis."""

    labels: tuple[str, ...]
    matrix: np.ndarray

    def success_probability(self, expected: dict[str, str]) -> float:
        """Mean probability of the expected output across all inputs."""
        idx = {lab: k for k, lab in enumerate(self.labels)}
        return float(
            np.mean([self.matrix[idx[i], idx[o]] for i, o in expected.items()])
        )


def fredkin_expected_outputs() -> dict[str, str]:
    """Ideal input -> output map: targets swap when the control is set."""
    table = {}
    for c in (0, 1):
        for ni in (0, 1):
            for nj in (0, 1):
                out = (c, nj, ni) if c == 1 else (c, ni, nj)
                table[f"{c}{ni}{nj}"] = f"{out[0]}{out[1]}{out[2]}"
    return table


def fredkin_truth_table(
    register: ModeRegister,
    mode_i: int = 0,
    mode_j: int = 1,
    strength: float = 1.0,
    control_level: int = 1,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> TruthTable:
    """Simulate the eight-input truth table of the controlled-swap gate.

    With ``shots=None`` the exact outcome populations are returned; with a
    shot count, each row is a multinomial sample of projective measurements.
    """
    propagate = eigenpropagator(cbs(register, mode_i, mode_j, strength, 0.0, control_level))
    tau = cbs_duration(strength)

    labels = tuple(f"{c}{ni}{nj}" for c in (0, 1) for ni in (0, 1) for nj in (0, 1))
    dims = register.dims
    basis_indices = []
    for lab in labels:
        c, ni, nj = (int(ch) for ch in lab)
        ns = [0] * register.n_modes
        ns[mode_i], ns[mode_j] = ni, nj
        basis_indices.append(register.index(c, ns))

    matrix = np.zeros((8, 8))
    for row, lab in enumerate(labels):
        c, ni, nj = (int(ch) for ch in lab)
        ns = [0] * register.n_modes
        ns[mode_i], ns[mode_j] = ni, nj
        state = fock_state(register, ns, bit=c)
        final = propagate(tau, state.amplitudes)
        probs = np.abs(final[basis_indices]) ** 2
        if shots is None:
            matrix[row] = probs
        else:
            if rng is None:
                raise ValueError("sampled truth table needs an rng")
            # any residual probability outside the 8 labelled states is lost
            draws = rng.multinomial(shots, np.clip(probs, 0, None) / max(probs.sum(), 1e-300))
            matrix[row] = draws / shots
    return TruthTable(labels, matrix)
