"""Work-statistics and absorption-refrigerator protocol tests."""

import numpy as np
import pytest
from scipy import constants

from phonsim.dynamics import propagate_static
from phonsim.hamiltonians import YB171_MASS, trilinear
from phonsim.hilbert import (
    LeakageError,
    ModeRegister,
    ModeSpec,
    QubitSpec,
    embed,
    expectation,
    fock_state,
    mode_ladder,
)
from phonsim.protocols.fridge import FridgeConfig, fridge_run
from phonsim.protocols.jarzynski import ThermoParams, jarzynski_run

W_TRAP = 2 * np.pi * 200e3


def thermo(beta_hw=1.0, alpha2=2.0, tau=5e-6, trials=20_000, dim=40, shape="cosine"):
    f_max = np.sqrt(alpha2) * W_TRAP * np.sqrt(2 * constants.hbar * YB171_MASS * W_TRAP)
    return ThermoParams(
        mass=YB171_MASS,
        trap_frequency=W_TRAP,
        force_max=f_max,
        ramp_duration=tau,
        beta=beta_hw / (constants.hbar * W_TRAP),
        trials=trials,
        dim=dim,
        ramp_shape=shape,
    )


class TestJarzynski:
    def test_zero_force_gives_unit_estimator(self):
        params = ThermoParams(
            mass=YB171_MASS,
            trap_frequency=W_TRAP,
            force_max=0.0,
            ramp_duration=5e-6,
            beta=1.0 / (constants.hbar * W_TRAP),
            trials=2000,
            dim=20,
        )
        res = jarzynski_run(params, "ramp", np.random.default_rng(0))
        assert np.all(res.works == 0.0)
        assert res.exp_average == pytest.approx(1.0, abs=0)
        assert res.minus_log_dissipated == 0.0

    def test_adiabatic_protocol_work_equals_delta_f(self):
        params = thermo(beta_hw=1.2, trials=4000)
        res = jarzynski_run(params, "adiabatic", np.random.default_rng(1))
        assert np.max(np.abs(res.works - res.delta_f)) < 1e-3 * abs(res.delta_f)
        assert res.minus_log_dissipated == pytest.approx(0.0, abs=1e-6)

    def test_delta_f_analytic(self):
        params = thermo()
        expected = -params.force_max**2 / (2 * YB171_MASS * W_TRAP**2)
        assert params.delta_f == pytest.approx(expected, rel=1e-12)
        # and beta * dF is the dimensionless content of the run
        assert params.beta * params.delta_f == pytest.approx(-2.0, rel=1e-12)

    @pytest.mark.parametrize("protocol", ["sudden", "ramp"])
    def test_equality_within_monte_carlo_error(self, protocol):
        params = thermo(beta_hw=0.9, alpha2=1.2, tau=2e-5, trials=40_000)
        res = jarzynski_run(params, protocol, np.random.default_rng(7))
        assert res.within_sigma < 4.0
        assert res.exp_average == pytest.approx(
            np.exp(-params.beta * params.delta_f), rel=5 * res.stderr + 1e-12
        )

    def test_transition_matrix_against_forced_oscillator_form(self):
        # independent oracle: the driven oscillator transfers populations as
        # |<m|D(rho)|n>|^2 with rho = chi e^{-iwt} - alpha_f and
        # chi = -i * integral g(s) e^{iws} ds
        from phonsim.hilbert import displacement_matrix
        from phonsim.protocols.jarzynski import _transition_matrix

        params = thermo(beta_hw=1.0, alpha2=1.5, tau=7e-6, trials=10, dim=30)
        tau = params.ramp_duration
        w = params.trap_frequency
        g_max = params.drive_rate_max
        ss = np.linspace(0, tau, 20001)
        gs = g_max * 0.5 * (1 - np.cos(np.pi * ss / tau))
        chi = -1j * np.trapezoid(gs * np.exp(1j * w * ss), ss)
        rho = chi * np.exp(-1j * w * tau) - params.displacement
        oracle = np.abs(displacement_matrix(30, rho)) ** 2
        sim = _transition_matrix(params, "ramp", 8)
        assert np.max(np.abs(sim - oracle[:, :8])) < 1e-6

    def test_protocol_independence_of_estimator(self):
        params = thermo(beta_hw=1.0, alpha2=1.0, tau=1.2e-5, trials=30_000)
        values = []
        for k, protocol in enumerate(("sudden", "ramp", "adiabatic")):
            res = jarzynski_run(params, protocol, np.random.default_rng(100 + k))
            values.append(res.minus_log_dissipated)
            assert res.within_sigma < 4.0
        assert np.max(np.abs(values)) < 0.05

    def test_linear_ramp_shape_supported(self):
        params = thermo(beta_hw=1.0, alpha2=1.0, tau=2e-5, trials=10_000, shape="linear")
        res = jarzynski_run(params, "ramp", np.random.default_rng(3))
        assert res.within_sigma < 4.0

    def test_truncation_guard(self):
        params = thermo(beta_hw=0.05, trials=500, dim=12)  # hot bath, tiny dim
        with pytest.raises(LeakageError):
            jarzynski_run(params, "sudden", np.random.default_rng(0))


class TestFridge:
    def xi(self):
        return 2 * np.pi * 1.4e3

    def test_vacuum_stationary(self):
        xi = self.xi()
        cfg = FridgeConfig(
            strength=xi, nbar_h=0, nbar_w=0, nbar_c=0,
            times=tuple(np.linspace(0, 10 / xi, 50)), trials=20,
        )
        res = fridge_run(cfg, np.random.default_rng(0))
        assert np.max(np.abs(res.mean_occupations)) == 0.0
        assert not res.cooled

    def test_single_excitation_exchange_cosine(self):
        xi = self.xi()
        times = np.linspace(0, 2 * np.pi / xi, 60)
        cfg = FridgeConfig(
            strength=xi, nbar_h=0, nbar_w=0, nbar_c=0, times=tuple(times), trials=1
        )
        # override sampling by exact mode on a pure |1,0,0>: use the chain
        from phonsim.protocols.fridge import _chain_trajectory

        curves, _ = _chain_trajectory((1, 0, 0, float(xi), tuple(times)))
        hot = np.asarray(curves)[0]
        assert np.max(np.abs(hot - np.cos(xi * times) ** 2)) < 1e-10

    def test_chain_matches_full_register_evolution(self):
        # cross-check the ladder reduction against the generic propagator
        xi = self.xi()
        reg = ModeRegister(QubitSpec(), tuple(ModeSpec(2 * np.pi * 1e6, 0.05, 6) for _ in range(3)))
        h = trilinear(reg, 0, 1, 2, strength=xi)
        state = fock_state(reg, (2, 1, 2))
        nums = [embed(mode_ladder(6).number, k, reg) for k in range(3)]
        from phonsim.protocols.fridge import _chain_trajectory

        times = np.linspace(0, 3 / xi, 7)
        curves, _ = _chain_trajectory((2, 1, 2, float(xi), tuple(times)))
        curves = np.asarray(curves)
        for i, t in enumerate(times):
            out = propagate_static(h, t, state, leakage_tol=1.0)
            for m in range(3):
                assert expectation(out, nums[m]) == pytest.approx(curves[m, i], abs=1e-8)

    def test_pair_sums_conserved_along_trajectories(self):
        xi = self.xi()
        times = tuple(np.linspace(0, 10 / xi, 40))
        from phonsim.protocols.fridge import _chain_trajectory

        for start in [(1, 2, 3), (0, 4, 2), (3, 1, 1)]:
            curves, _ = _chain_trajectory((*start, float(xi), times))
            h, w, c = np.asarray(curves)
            assert np.max(np.abs((h + w) - (start[0] + start[1]))) < 1e-10
            assert np.max(np.abs((h + c) - (start[0] + start[2]))) < 1e-10

    def test_cooling_on_the_cooling_side(self):
        xi = self.xi()
        times = tuple(np.linspace(0, 30 / xi, 80))
        cfg = FridgeConfig(
            strength=xi, nbar_h=0.2, nbar_w=3.0, nbar_c=1.0,
            times=times, trials=1500, sample_dim=30,
        )
        exact = fridge_run(cfg, exact=True, weight_floor=1e-9)
        assert exact.cooled
        assert exact.long_time_average[2] < 0.85
        sampled = fridge_run(cfg, np.random.default_rng(11))
        assert sampled.cooled
        assert sampled.long_time_average[2] == pytest.approx(
            exact.long_time_average[2], abs=0.1
        )

    def test_balanced_point_is_stationary_on_average(self):
        # nbar = (0.5, 2, 1) satisfies the rate balance: no net cooling
        xi = self.xi()
        cfg = FridgeConfig(
            strength=xi, nbar_h=0.5, nbar_w=2.0, nbar_c=1.0,
            times=(0.0, 1 / xi), trials=10, sample_dim=26,
        )
        res = fridge_run(cfg, exact=True, weight_floor=1e-10)
        assert res.long_time_average[2] == pytest.approx(res.initial_occupations[2], abs=2e-3)

    def test_single_shot_minimum_beats_long_time_average(self):
        xi = self.xi()
        times = tuple(np.linspace(0, 20 / xi, 160))
        cfg = FridgeConfig(
            strength=xi, nbar_h=0.2, nbar_w=3.0, nbar_c=1.0,
            times=times, trials=800, sample_dim=30,
        )
        res = fridge_run(cfg, np.random.default_rng(5))
        assert res.min_cold < res.long_time_average[2]
        assert 0.0 < res.min_cold_time <= times[-1]

    def test_squeezed_work_mode_runs_and_reports(self):
        xi = self.xi()
        times = tuple(np.linspace(0, 20 / xi, 60))
        r_w = 1.0
        nbar_equiv = float(np.sinh(r_w) ** 2)
        squeezed_cfg = FridgeConfig(
            strength=xi, nbar_h=0.2, nbar_w=nbar_equiv, nbar_c=1.0,
            times=times, trials=1200, squeeze_w=r_w, sample_dim=30,
        )
        thermal_cfg = FridgeConfig(
            strength=xi, nbar_h=0.2, nbar_w=nbar_equiv, nbar_c=1.0,
            times=times, trials=1200, sample_dim=30,
        )
        sq = fridge_run(squeezed_cfg, exact=True, weight_floor=1e-9)
        th = fridge_run(thermal_cfg, exact=True, weight_floor=1e-9)
        # same mean work occupation by construction; both cool, amounts differ
        assert sq.initial_occupations[1] == pytest.approx(nbar_equiv, abs=0.01)
        assert sq.cooled and th.cooled
        assert sq.long_time_average[2] != pytest.approx(th.long_time_average[2], abs=1e-4)
