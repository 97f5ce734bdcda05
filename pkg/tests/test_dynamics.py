import math

import numpy as np
import pytest

from phonsim import _kernels
from phonsim.dynamics import (
    ConvergenceError,
    DriveTerm,
    PulseSegment,
    PulseSequence,
    StaPulseParams,
    eigenpropagator,
    lamb_dicke_composite,
    map_states,
    propagate_pulsed,
    propagate_static,
    sideband_spectrum_scan,
    uniform_bsb,
)
from phonsim.hamiltonians import carrier, degenerate_parametric, sideband, spin_squeeze
from phonsim.hilbert import (
    LeakageError,
    ModeRegister,
    ModeSpec,
    OperatorMatrix,
    QubitSpec,
    embed,
    expectation,
    fidelity,
    fock_state,
    mode_ladder,
    phonon_distribution,
    qubit_populations,
    state_from_amplitudes,
    vacuum_state,
)


def reg(*dims, eta=0.1):
    return ModeRegister(QubitSpec(), tuple(ModeSpec(2 * np.pi * 1e6, eta, d) for d in dims))


OMEGA = 2 * np.pi * 50e3
ETA = 0.1


class TestStatic:
    def test_zero_hamiltonian_identity(self):
        r = reg(4)
        zero = OperatorMatrix(r, np.zeros((r.dim, r.dim)), hermitian=True)
        out = propagate_static(zero, 1.0, vacuum_state(r))
        assert fidelity(out, vacuum_state(r)) == 1.0

    def test_carrier_pi_pulse(self):
        r = reg(3)
        out = propagate_static(carrier(r, rabi=OMEGA), np.pi / OMEGA, vacuum_state(r))
        assert qubit_populations(out)[1] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", range(6))
    def test_sideband_ladder_oscillation(self, n):
        # population oscillates at sqrt(n+1)*eta*rabi
        r = reg(9, eta=ETA)
        h = sideband(r, 0, "blue", rabi=OMEGA)
        wn = math.sqrt(n + 1) * ETA * OMEGA
        state = fock_state(r, (n,))
        quarter = propagate_static(h, (np.pi / 2) / wn, state)
        assert qubit_populations(quarter)[1] == pytest.approx(0.5, abs=1e-10)
        full = propagate_static(h, 2 * np.pi / wn, state)
        assert fidelity(full, state) == pytest.approx(1.0, abs=1e-10)

    def test_non_hermitian_rejected(self):
        r = reg(3)
        m = np.zeros((r.dim, r.dim), dtype=complex)
        m[0, 1] = 1.0
        op = OperatorMatrix(r, m, hermitian=False)
        with pytest.raises(ValueError):
            propagate_static(op, 1.0, vacuum_state(r))

    def test_leakage_guard_trips(self):
        r = reg(4, eta=0.05)
        h = spin_squeeze(r, 0, zeta_rate=1e5)
        with pytest.raises(LeakageError):
            propagate_static(h, 1e-5, vacuum_state(r))

    def test_energy_conserved(self):
        r = reg(6)
        h = sideband(r, 0, "blue", rabi=OMEGA, detuning=1e4)
        state = state_from_amplitudes(
            r, np.random.default_rng(5).normal(size=r.dim) + 0j
        )
        e0 = expectation(state, h)
        for t in (1e-6, 1e-4, 3e-3):
            et = expectation(propagate_static(h, t, state, leakage_tol=2.0), h)
            assert et == pytest.approx(e0, rel=1e-9)

    def test_eigenpropagator_matches(self):
        r = reg(5)
        h = sideband(r, 0, "blue", rabi=OMEGA)
        prop = eigenpropagator(h)
        state = fock_state(r, (2,))
        direct = propagate_static(h, 3e-5, state, leakage_tol=1.0)
        via = state_from_amplitudes(r, prop(3e-5, state.amplitudes))
        assert fidelity(direct, via) == pytest.approx(1.0, abs=1e-12)


class TestPulsed:
    def test_constant_envelope_matches_static(self):
        r = reg(6, eta=ETA)
        h = sideband(r, 0, "blue", rabi=OMEGA)
        seg = PulseSegment(
            r,
            2e-5,
            terms=(DriveTerm(h.matrix / 2, lambda t: 1.0, kind="pair"),),
        )
        state = fock_state(r, (1,))
        pulsed = propagate_pulsed(seg, state)
        static = propagate_static(h, 2e-5, state)
        assert np.linalg.norm(pulsed.amplitudes - static.amplitudes) < 1e-9

    def test_ramsey_echo_identity(self):
        r = reg(3)
        quarter = (np.pi / 2) / OMEGA
        seq = PulseSequence(
            (
                PulseSegment(r, quarter, static=carrier(r, rabi=OMEGA, phase=0.0)),
                PulseSegment(r, quarter, static=carrier(r, rabi=OMEGA, phase=np.pi)),
            )
        )
        out = propagate_pulsed(seq, vacuum_state(r))
        assert fidelity(out, vacuum_state(r)) == pytest.approx(1.0, abs=1e-10)

    def test_unitarity_and_convergence_contract(self):
        r = reg(6, eta=ETA)
        half = 0.5j * (
            embed(np.array([[0, 0], [1, 0]], dtype=complex), "qubit", r).matrix
            @ embed(mode_ladder(6).raise_, 0, r).matrix
        )
        seg = PulseSegment(
            r,
            5e-5,
            terms=(DriveTerm(half, lambda t: OMEGA * ETA * np.sin(np.pi * t / 5e-5) * (1 + 0.3j),),),
        )
        state = fock_state(r, (2,))
        out = propagate_pulsed(seg, state)
        tighter = propagate_pulsed(seg, state, step_tol=0.5e-9)
        reference = propagate_pulsed(seg, state, fixed_steps=2**15)
        assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-10
        # tightening the step control moves the accepted state by far less
        # than the 1e-8 convergence contract
        assert np.linalg.norm(out.amplitudes - tighter.amplitudes) < 1e-8
        assert np.linalg.norm(out.amplitudes - reference.amplitudes) < 1e-8

    def test_second_order_convergence(self):
        # midpoint piecewise-constant stepping is globally second order
        r = reg(2)
        seg_for = lambda: PulseSegment(
            r,
            1e-5,
            terms=(
                DriveTerm(
                    embed(np.array([[0, 0], [1, 0]], dtype=complex), "qubit", r).matrix,
                    lambda t: 0.5 * OMEGA * (np.sin(np.pi * t / 1e-5) + 0.2j),
                ),
            ),
        )
        state = vacuum_state(r)
        exact = propagate_pulsed(seg_for(), state, fixed_steps=2**14).amplitudes
        errs = []
        steps = [32, 64, 128, 256]
        for n in steps:
            approx = propagate_pulsed(seg_for(), state, fixed_steps=n).amplitudes
            errs.append(np.linalg.norm(approx - exact))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders > 1.7)
        assert np.all(orders < 2.3)

    def test_adaptive_matches_fine_fixed(self):
        r = reg(5, eta=ETA)
        seq = uniform_bsb(r, StaPulseParams(omega0=OMEGA))
        state = vacuum_state(r)
        adaptive = propagate_pulsed(seq, state, step_tol=1e-10)
        fine = propagate_pulsed(seq, state, fixed_steps=2**13)
        assert np.linalg.norm(adaptive.amplitudes - fine.amplitudes) < 1e-7

    def test_convergence_error_reported(self):
        r = reg(2)
        # envelope oscillating far too fast for the step budget
        seg = PulseSegment(
            r,
            1e-3,
            terms=(
                DriveTerm(
                    embed(np.array([[0, 0], [1, 0]], dtype=complex), "qubit", r).matrix,
                    lambda t: 1e8 * np.sin(3e12 * t),
                ),
            ),
        )
        with pytest.raises(ConvergenceError):
            propagate_pulsed(seg, vacuum_state(r), step_tol=1e-13, min_steps=2)

    def test_observable_recording(self):
        r = reg(3)
        h = carrier(r, rabi=OMEGA)
        seg = PulseSegment(r, np.pi / OMEGA, static=h)
        proj = embed(np.diag([0.0, 1.0]), "qubit", r)
        final, samples = propagate_pulsed(
            PulseSequence((seg,)),
            vacuum_state(r),
            observables={"p_up": proj},
            record_times=[0.25 * np.pi / OMEGA, 0.5 * np.pi / OMEGA, np.pi / OMEGA],
        )
        expect = [math.sin(math.pi / 8) ** 2, 0.5, 1.0]
        assert samples["p_up"] == pytest.approx(expect, abs=1e-9)
        assert qubit_populations(final)[1] == pytest.approx(1.0, abs=1e-9)

    def test_backends_agree(self):
        r = reg(6, eta=ETA)
        seq = uniform_bsb(r, StaPulseParams(omega0=OMEGA))
        state = fock_state(r, (1,))
        py = propagate_pulsed(seq, state, backend="python", fixed_steps=512)
        try:
            cy = propagate_pulsed(seq, state, backend="cython", fixed_steps=512)
        except ValueError:
            pytest.skip("compiled backend not built")
        assert np.max(np.abs(py.amplitudes - cy.amplitudes)) < 1e-11


class TestUniformBsb:
    @pytest.mark.parametrize("n", range(6))
    def test_transfer_above_99(self, n):
        r = reg(12, eta=ETA)
        seq = uniform_bsb(r, StaPulseParams(omega0=OMEGA))
        out = propagate_pulsed(seq, fock_state(r, (n,)), step_tol=1e-8, leakage_tol=1e-3)
        p = abs(out.tensor_view()[1, n + 1]) ** 2
        assert p >= 0.99

    def test_total_duration_seven_pi_times(self):
        params = StaPulseParams(omega0=OMEGA)
        seq = uniform_bsb(reg(4), params)
        assert seq.duration == pytest.approx(7 * np.pi / OMEGA, rel=1e-12)

    def test_plain_adiabatic_passage_without_cd(self):
        # slow sweep with beta=0 still transfers (Landau-Zener limit)
        r = reg(6, eta=ETA)
        params = StaPulseParams(
            omega0=OMEGA, beta=0.0, delta0=3 * OMEGA, half_duration=12 * np.pi / OMEGA
        )
        out = propagate_pulsed(uniform_bsb(r, params), vacuum_state(r), step_tol=1e-8)
        assert abs(out.tensor_view()[1, 1]) ** 2 > 0.99

    @pytest.mark.parametrize("variant,floor", [("sweep", 0.98), ("mirrored", 0.90)])
    def test_round_trip_returns_population(self, variant, floor):
        r = reg(9, eta=ETA)
        seq = uniform_bsb(r, StaPulseParams(omega0=OMEGA, variant=variant))
        for n in (0, 2, 4):
            once = propagate_pulsed(seq, fock_state(r, (n,)), step_tol=1e-8, leakage_tol=1e-2)
            twice = propagate_pulsed(seq, once, step_tol=1e-8, leakage_tol=1e-2)
            assert abs(twice.tensor_view()[0, n]) ** 2 >= floor

    def test_mirrored_variant_uniform_phases(self):
        # the mirrored inversion leaves an n-independent transfer phase
        r = reg(9, eta=ETA)
        seq = uniform_bsb(r, StaPulseParams(omega0=OMEGA, variant="mirrored"))
        phases = []
        for n in range(4):
            out = propagate_pulsed(seq, fock_state(r, (n,)), step_tol=1e-8, leakage_tol=1e-1)
            phases.append(np.angle(out.tensor_view()[1, n + 1]))
        spread = np.ptp(np.unwrap(phases))
        assert spread < 0.1


class TestScan:
    def test_uncoupled_single_peak(self):
        r = reg(5, 4, eta=ETA)
        state = fock_state(r, (1, 0))

        def builder(delta):
            return sideband(r, 0, "blue", rabi=0.2 * OMEGA, detuning=delta)

        deltas = np.linspace(-4, 4, 41) * 0.2 * OMEGA * ETA
        t_probe = np.pi / (math.sqrt(2) * 0.2 * OMEGA * ETA)
        curve = sideband_spectrum_scan(builder, deltas, state, t_probe)
        peak = curve[np.argmax(curve[:, 1]), 0]
        assert abs(peak) <= deltas[1] - deltas[0]
        # single dominant lobe: response is concentrated around resonance
        assert curve[np.abs(curve[:, 0]) > 2.5 * 0.2 * OMEGA * ETA, 1].max() < 0.5

    def test_coupled_state_two_branches(self):
        # with the parametric coupling on, the probe from |1a,0b> splits
        r = reg(5, 7, eta=ETA)
        xi = 0.15 * OMEGA * ETA
        probe_rabi = 0.2 * OMEGA

        def builder(delta_probe):
            h = sideband(r, 0, "blue", rabi=probe_rabi, detuning=delta_probe)
            return h + degenerate_parametric(r, 0, 1, strength=xi, detuning=0.0)

        eff = probe_rabi * ETA
        deltas = np.linspace(-6, 6, 121) * eff
        curve = sideband_spectrum_scan(builder, deltas, fock_state(r, (1, 0)), np.pi / eff)
        signal = curve[:, 1]
        # two separated response lobes around the split resonances
        mid = signal[np.abs(curve[:, 0]) < 0.5 * eff].max()
        wings = signal[np.abs(curve[:, 0]) > 1.0 * eff].max()
        assert wings > mid

    def test_map_states_deterministic(self):
        vals = map_states(lambda x: x * x, range(8), max_workers=4)
        assert vals == [x * x for x in range(8)]


class TestLambDickeComposite:
    def test_resonant_carrier_dominates_at_small_eta(self):
        r = ModeRegister(QubitSpec(), (ModeSpec(2 * np.pi * 5e6, 0.03, 5),))
        rabi = 2 * np.pi * 20e3  # far below the mode frequency
        seg = lamb_dicke_composite(r, 0, rabi, duration=np.pi / rabi)
        out = propagate_pulsed(seg, vacuum_state(r), step_tol=1e-8)
        # carrier pi pulse survives the off-resonant sideband terms
        assert qubit_populations(out)[1] > 0.95
        assert phonon_distribution(out, 0)[0] > 0.95
