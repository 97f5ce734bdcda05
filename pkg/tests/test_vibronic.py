"""Vibronic transition tables, spectra, and sampling."""

import math

import numpy as np
import pytest

from _oracles import fc_oracle_two_mode
from phonsim.hilbert import ModeRegister, ModeSpec, QubitSpec, vacuum_state
from phonsim.protocols.vibronic import (
    CM1_TO_RAD_PER_S,
    DoktorovParams,
    doktorov_build,
    vibronic_fc,
    vibronic_sample,
    vibronic_spectrum,
)

SO2_NEUTRAL = (1178.4, 518.9)   # initial surface frequencies, cm^-1
SO2_CATION = (1112.7, 415.0)
SO2_ANION = (989.5, 451.4)

PHOTO_IONIZATION = DoktorovParams(
    initial_freqs_cm1=SO2_NEUTRAL,
    final_freqs_cm1=SO2_CATION,
    displacement=(-0.026, 1.716),
    rotation=0.189,
)
DETACHMENT = DoktorovParams(
    initial_freqs_cm1=SO2_ANION,
    final_freqs_cm1=SO2_NEUTRAL,
    displacement=(1.360, -0.264),
    rotation=0.065,
)


class TestFcTable:
    def test_pure_displacement_is_poisson(self):
        params = DoktorovParams((500.0,), (500.0,), (1.0,), 0.0)
        table = vibronic_fc(params, n_max=14, dims=(28,))
        expected = np.array([math.exp(-1.0) / math.factorial(n) for n in range(15)])
        assert np.max(np.abs(table - expected)) < 1e-12

    def test_frequency_change_is_sech_ladder(self):
        # single-mode frequency drop: even progression of a squeezed vacuum
        wi, wf = 800.0, 400.0
        params = DoktorovParams((wi,), (wf,), (0.0,), 0.0)
        table = vibronic_fc(params, n_max=10, dims=(40,))
        rr = 0.5 * math.log(wi / wf)
        assert table[0] == pytest.approx(1 / math.cosh(rr), abs=1e-12)
        assert np.max(table[1::2]) < 1e-24
        # closed form for the two-phonon line of a squeezed vacuum
        assert table[2] == pytest.approx(math.tanh(rr) ** 2 / (2 * math.cosh(rr)), rel=1e-10)

    @pytest.mark.parametrize("params", [PHOTO_IONIZATION, DETACHMENT])
    def test_table_matches_position_space_oracle(self, params):
        table = vibronic_fc(params, n_max=12, dims=(30, 30))
        oracle = fc_oracle_two_mode(
            params.initial_freqs_cm1,
            params.final_freqs_cm1,
            [a.real for a in params.displacement],
            float(params.rotation),
            n_max=12,
        )
        assert np.max(np.abs(table - oracle)) < 1e-6

    def test_total_mass_at_dim30(self):
        table = vibronic_fc(PHOTO_IONIZATION, n_max=29)
        assert table.sum() >= 0.999

    def test_reference_frequency_invariance(self):
        scaled = DoktorovParams(
            tuple(2 * f for f in SO2_NEUTRAL),
            tuple(2 * f for f in SO2_CATION),
            (-0.026, 1.716),
            0.189,
        )
        a = vibronic_fc(PHOTO_IONIZATION, n_max=10, dims=(26, 26))
        b = vibronic_fc(scaled, n_max=10, dims=(26, 26))
        assert np.max(np.abs(a - b)) < 1e-12

    def test_operator_build_consistent_with_column(self):
        reg = ModeRegister(
            QubitSpec(), tuple(ModeSpec(2 * np.pi * 1e6, 0.05, 14) for _ in range(2))
        )
        op = doktorov_build(reg, PHOTO_IONIZATION)
        # unitary on the register
        u = op.matrix
        assert np.max(np.abs(u @ u.conj().T - np.eye(reg.dim))) < 1e-10
        column = np.abs(op.apply(vacuum_state(reg))) ** 2
        table = vibronic_fc(PHOTO_IONIZATION, n_max=13, dims=(14, 14))
        assert np.max(np.abs(column.reshape(reg.dims)[0] - table)) < 1e-10

    def test_mode_count_validation(self):
        with pytest.raises(ValueError):
            DoktorovParams((500.0,), (400.0, 300.0), (0.1,), 0.0)


class TestSpectrum:
    def test_photoionization_dominated_by_mode2_progression(self):
        table = vibronic_fc(PHOTO_IONIZATION, n_max=18, dims=(30, 30))
        # the mode-2 ladder carries nearly all intensity
        pure_mode2 = table[0, :].sum()
        assert pure_mode2 > 0.9
        spec = vibronic_spectrum(table, SO2_CATION)
        top = np.argsort(spec.stick_intensities)[::-1][:4]
        top_positions = np.sort(spec.stick_positions[top])
        # dominant sticks spaced by the mode-2 frequency
        assert np.allclose(np.diff(top_positions), SO2_CATION[1], atol=1e-9)

    def test_detachment_mode1_progression_with_combination_bands(self):
        table = vibronic_fc(DETACHMENT, n_max=18, dims=(30, 30))
        mode1_mass = table[:, 0].sum()
        assert mode1_mass > 0.9
        # combination bands (both modes excited) are small but present
        comb = table[1:, 1:].sum()
        assert 1e-5 < comb < 0.1

    def test_broadened_trace_mass(self):
        table = vibronic_fc(PHOTO_IONIZATION, n_max=16, dims=(30, 30))
        spec = vibronic_spectrum(table, SO2_CATION, broadening_cm1=50.0)
        dx = spec.grid[1] - spec.grid[0]
        assert spec.broadened.sum() * dx == pytest.approx(table.sum(), rel=1e-3)

    def test_zero_broadening_gives_sticks_only(self):
        table = vibronic_fc(PHOTO_IONIZATION, n_max=6, dims=(20, 20))
        spec = vibronic_spectrum(table, SO2_CATION, broadening_cm1=0.0)
        assert spec.broadened is None
        assert spec.stick_positions[0] == 0.0

    def test_negative_broadening_rejected(self):
        table = vibronic_fc(PHOTO_IONIZATION, n_max=4, dims=(16, 16))
        with pytest.raises(ValueError):
            vibronic_spectrum(table, SO2_CATION, broadening_cm1=-1.0)

    def test_conversion_constant(self):
        assert CM1_TO_RAD_PER_S == pytest.approx(2 * np.pi * 29.9792458e9, rel=1e-12)


class TestSampling:
    def test_sample_counts_match_table(self):
        table = vibronic_fc(PHOTO_IONIZATION, n_max=10, dims=(26, 26))
        rng = np.random.default_rng(8)
        shots = 200_000
        counts = vibronic_sample(table, rng, shots)
        assert counts.sum() == shots
        freq = counts / shots
        probs = table / table.sum()
        # every strong line reproduced within 5 sigma binomial
        for idx in zip(*np.nonzero(probs > 5e-3)):
            sigma = math.sqrt(probs[idx] * (1 - probs[idx]) / shots)
            assert abs(freq[idx] - probs[idx]) < 5 * sigma + 1e-12

    def test_sampling_deterministic(self):
        table = vibronic_fc(DETACHMENT, n_max=8, dims=(22, 22))
        a = vibronic_sample(table, np.random.default_rng(3), 5000)
        b = vibronic_sample(table, np.random.default_rng(3), 5000)
        assert np.array_equal(a, b)
