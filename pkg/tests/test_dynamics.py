import math
import warnings

import numpy as np
import pytest

from archswitch.analytic import predict, trajectory_static_damped
from archswitch.dynamics import (
    InertiaWarning,
    SimulationConfig,
    detect_switching,
    energy_series,
    integrate_full,
    integrate_normal_form,
    integrate_overdamped,
    simulate_switching,
)
from archswitch.errors import MaxTimeExceeded, NoSwitching, ValidationError
from archswitch.model import LoadProgram, NondimArch, StateVector
from archswitch.statics import critical_point, equilibrium_at_force, trace_equilibrium_path


def reduced(ts, cp):
    return -2.0 * (ts.A - cp.A_c) @ cp.V1


@pytest.fixture(scope="module")
def arch6_undamped(arch6):
    return arch6.with_damping(0.0)


@pytest.fixture(scope="module")
def two_mode():
    arch = NondimArch(6.0, (1.0, 0.3), c=0.0)
    return arch, critical_point(arch)


# --------------------------------------------------------------------------
# configuration


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            {"rtol": 0.0},
            {"atol": 1e-2},
            {"threshold": 1.0},
            {"cutoff": -1.0},
            {"model": "stochastic"},
            {"initial": "random"},
            {"max_time": 0.0},
            {"method": "rk4"},
            {"record_stride": 0},
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(ValidationError):
            SimulationConfig(**kw)

    def test_defaults(self):
        cfg = SimulationConfig()
        assert (cfg.rtol, cfg.atol) == (1e-12, 1e-12)

    def test_overdamped_needs_damping(self, arch6_undamped):
        with pytest.raises(ValidationError):
            integrate_overdamped(arch6_undamped, LoadProgram(epsilon=1e-2))

    def test_state_shape_checked(self, arch6, cp6):
        with pytest.raises(ValidationError):
            integrate_full(arch6, LoadProgram(epsilon=1e-2), cp=cp6, state=StateVector(np.zeros(2)))

    def test_hold_load_validation(self):
        with pytest.raises(ValidationError):
            LoadProgram(hold=1.0, nu=1.0)
        assert LoadProgram(hold=3.0).force([0.0, 5.0]).tolist() == [3.0, 3.0]


# --------------------------------------------------------------------------
# integration


class TestIntegration:
    @pytest.mark.parametrize("model", ["full", "overdamped"])
    def test_marginal_equilibrium_is_fixed(self, arch6, cp6, model):
        cfg = SimulationConfig(max_time=10.0, stop_at_switch=False)
        run = integrate_full if model == "full" else integrate_overdamped
        ts = run(arch6, LoadProgram(epsilon=0.0), cfg, cp6)
        assert ts.tau[-1] == pytest.approx(10.0)
        assert np.max(np.abs(ts.A - cp6.A_c)) < 1e-6

    def test_time_strictly_increasing(self, arch6, cp6):
        ts = integrate_overdamped(arch6, LoadProgram(epsilon=1e-2), cp=cp6)
        assert np.all(np.diff(ts.tau) > 0.0)

    def test_load_follows_program(self, arch6, cp6):
        load = LoadProgram(nu=1e3)
        ts = integrate_overdamped(arch6, load, cp=cp6)
        np.testing.assert_allclose(ts.F, 1e3 * ts.tau, rtol=0, atol=1e-9 * cp6.F_c)

    def test_energy_conserved_one_mode(self, arch6_undamped):
        cp = critical_point(arch6_undamped)
        F = 0.5 * cp.F_c
        A = equilibrium_at_force(arch6_undamped, F, cp)
        state = StateVector(A + 0.01, np.array([0.5]))
        cfg = SimulationConfig(max_time=10.0, stop_at_switch=False)
        ts = integrate_full(arch6_undamped, LoadProgram(hold=F), cfg, cp, state)
        E = energy_series(ts)
        assert np.ptp(E["kinetic"]) > 1.0  # the run actually oscillates
        assert np.max(np.abs(E["total"] - E["total"][0])) / abs(E["total"][0]) < 1e-8

    def test_energy_conserved_two_modes(self, two_mode):
        arch, cp = two_mode
        F = 0.5 * cp.F_c
        A = equilibrium_at_force(arch, F, cp)
        state = StateVector(A + np.array([0.01, -0.002]))
        cfg = SimulationConfig(max_time=1.0, stop_at_switch=False)
        ts = integrate_full(arch, LoadProgram(hold=F), cfg, cp, state)
        E = ts.energies()
        assert np.max(np.abs(E["total"] - E["total"][0])) / abs(E["total"][0]) < 1e-8

    def test_riccati_trajectory(self, arch6, cp6):
        eps = 1e-3
        ts = integrate_overdamped(arch6, LoadProgram(epsilon=eps), cp=cp6)
        y = reduced(ts, cp6)
        window = y <= 10.0 * math.sqrt(cp6.p * eps / cp6.K)
        assert window.sum() > 20
        exact = trajectory_static_damped(ts.tau[window], cp6.K, cp6.p * eps, arch6.c)
        assert np.max(np.abs(y[window] - exact)) < 1e-6

    def test_riccati_error_is_first_order_in_eps(self, arch6, cp6):
        errs = []
        for eps in (1e-2, 1e-3):
            ts = integrate_overdamped(arch6, LoadProgram(epsilon=eps), cp=cp6)
            y = reduced(ts, cp6)
            window = y <= 10.0 * math.sqrt(eps / cp6.K)
            exact = trajectory_static_damped(ts.tau[window], cp6.K, eps, arch6.c)
            errs.append(np.max(np.abs(y[window] - exact)))
        assert 5.0 < errs[0] / errs[1] < 20.0

    def test_damped_static_monotone(self, arch6, cp6):
        ts = integrate_overdamped(arch6, LoadProgram(epsilon=1e-2), cp=cp6)
        assert np.all(np.diff(ts.delta) > 0.0)

    def test_inertia_warning(self, arch6, cp6):
        with pytest.warns(InertiaWarning):
            integrate_overdamped(arch6, LoadProgram(epsilon=1.0), cp=cp6)

    def test_no_warning_when_overdamped(self, arch6, cp6):
        with warnings.catch_warnings():
            warnings.simplefilter("error", InertiaWarning)
            integrate_overdamped(arch6, LoadProgram(epsilon=1e-3), cp=cp6)

    def test_implicit_matches_explicit(self, arch6, cp6):
        load = LoadProgram(epsilon=1e-2)
        e1, _ = simulate_switching(arch6, load, SimulationConfig(method="explicit"), cp6)
        e2, _ = simulate_switching(arch6, load, SimulationConfig(method="implicit", rtol=1e-10, atol=1e-12), cp6)
        assert e2.tau_switch == pytest.approx(e1.tau_switch, rel=1e-6)

    def test_max_time_exceeded(self, arch6, cp6):
        with pytest.raises(MaxTimeExceeded):
            simulate_switching(arch6, LoadProgram(epsilon=1e-2), SimulationConfig(max_time=1.0), cp6)

    def test_runs_are_deterministic(self, arch6, cp6):
        a, _ = simulate_switching(arch6, LoadProgram(nu=1e3), cp=cp6)
        b, _ = simulate_switching(arch6, LoadProgram(nu=1e3), cp=cp6)
        assert a.tau_switch == b.tau_switch


# --------------------------------------------------------------------------
# switching detection


class TestSwitching:
    def test_static_damped_matches_law(self, arch6, cp6):
        load = LoadProgram(epsilon=1e-2)
        ev, _ = simulate_switching(arch6, load, cp=cp6)
        tau = predict(arch6, load, cp=cp6).tau_inf
        assert abs(ev.tau_switch - tau) / ev.tau_switch <= 0.01
        assert ev.F_switch == cp6.F_c + 1e-2

    def test_static_undamped_matches_law(self, arch6_undamped):
        cp = critical_point(arch6_undamped)
        load = LoadProgram(epsilon=1e-2)
        ev, _ = simulate_switching(arch6_undamped, load, SimulationConfig(model="full"), cp)
        tau = predict(arch6_undamped, load, cp=cp).tau_inf
        assert abs(ev.tau_switch - tau) / ev.tau_switch <= 0.01

    def test_doubling_damping_doubles_time(self, arch6, cp6):
        load = LoadProgram(epsilon=1e-2)
        t1, _ = simulate_switching(arch6, load, cp=cp6)
        t2, _ = simulate_switching(arch6.with_damping(200.0), load, cp=cp6)
        assert t2.tau_switch == pytest.approx(2.0 * t1.tau_switch, rel=1e-9)

    @pytest.mark.parametrize("model", ["overdamped", "full"])
    def test_threshold_insensitive(self, arch6, cp6, model):
        arch = arch6 if model == "overdamped" else arch6.with_damping(0.0)
        cp = critical_point(arch)
        load = LoadProgram(epsilon=1e-2)
        taus = [
            simulate_switching(arch, load, SimulationConfig(model=model, threshold=th), cp)[0].tau_switch
            for th in (0.0125, 0.025, 0.05)
        ]
        assert max(taus) / min(taus) - 1.0 < 1e-3

    def test_tolerance_halving(self, arch6, cp6):
        load = LoadProgram(epsilon=1e-2)
        a, _ = simulate_switching(arch6, load, SimulationConfig(rtol=2e-12, atol=2e-12), cp6)
        b, _ = simulate_switching(arch6, load, SimulationConfig(rtol=1e-12, atol=1e-12), cp6)
        assert abs(a.tau_switch - b.tau_switch) / b.tau_switch < 1e-6

    def test_tail_is_small(self, arch6, cp6):
        ev, _ = simulate_switching(arch6, LoadProgram(epsilon=1e-2), cp=cp6)
        assert 0.0 < ev.tail < 0.05 * ev.tau_switch
        assert ev.tau_switch == pytest.approx(ev.tau_cross + ev.tail, rel=1e-15)

    def test_no_switching_below_level(self, arch6, cp6):
        cfg = SimulationConfig(max_time=1.0, stop_at_switch=False)
        ts = integrate_overdamped(arch6, LoadProgram(epsilon=1e-2), cfg, cp6)
        with pytest.raises(NoSwitching):
            detect_switching(ts, cp6)

    def test_ramp_damped_force(self, arch6, cp6):
        load = LoadProgram(nu=1.0)
        ev, _ = simulate_switching(arch6, load, cp=cp6)
        pred = predict(arch6, load, cp=cp6)
        assert abs(ev.F_switch - pred.F_switch) / pred.F_switch <= 0.02
        assert ev.F_switch > cp6.F_c

    def test_ramp_force_increases_with_rate(self, arch6, cp6):
        forces = [simulate_switching(arch6, LoadProgram(nu=nu), cp=cp6)[0].F_switch for nu in (1e2, 1e3, 1e4, 1e5)]
        assert all(f > cp6.F_c for f in forces)
        assert all(b > a for a, b in zip(forces, forces[1:]))

    def test_ramp_damped_force_ratio(self, arch6, cp6):
        ev, _ = simulate_switching(arch6, LoadProgram(nu=1e3), cp=cp6)
        assert 1.0 <= ev.F_switch / cp6.F_c <= 1.1

    def test_undamped_ramp_force_above_fold(self, arch6_undamped):
        cp = critical_point(arch6_undamped)
        ev, _ = simulate_switching(arch6_undamped, LoadProgram(nu=1e4), SimulationConfig(model="full"), cp)
        assert ev.F_switch > cp.F_c

    def test_tip_state_past_fold(self, arch6, cp6):
        ev, _ = simulate_switching(arch6, LoadProgram(epsilon=1e-2), cp=cp6)
        assert float(-2.0 * cp6.V1 @ (ev.A_tip - cp6.A_c)) > 0.0


# --------------------------------------------------------------------------
# force-displacement structure


class TestRampStructure:
    @staticmethod
    def static_force(arch, delta):
        path = trace_equilibrium_path(arch, np.linspace(0.0, float(np.max(delta)), 2001))
        return np.interp(delta, path.delta, path.F)

    def test_damped_ramp_tracks_static_curve(self, arch6, cp6):
        _, ts = simulate_switching(arch6, LoadProgram(nu=1.0), cp=cp6)
        before = ts.delta < cp6.delta_c
        d, F = ts.delta[before], ts.F[before]
        Fs = self.static_force(arch6, d)
        off = np.abs(F - Fs) > 1e-3 * cp6.F_c
        assert np.all(d[off] > 0.9 * cp6.delta_c)

    def test_undamped_ramp_oscillates(self, arch6_undamped):
        arch = arch6_undamped
        cp = critical_point(arch)
        _, ts = simulate_switching(arch, LoadProgram(nu=1e3), SimulationConfig(model="full"), cp)
        pre = ts.F < cp.F_c
        path = trace_equilibrium_path(arch, np.linspace(0.0, cp.delta_c, 4001))
        resid = ts.delta[pre] - np.interp(ts.F[pre], path.F, path.delta)
        crossings = np.count_nonzero(np.diff(np.sign(resid)) != 0)
        assert crossings >= 3


# --------------------------------------------------------------------------
# normal form


class TestNormalForm:
    def test_static_damped_pole(self):
        run = integrate_normal_form(2.0, 3.0, eps=0.5)
        assert run.tau_switch == pytest.approx(0.5 * math.pi * 3.0 / 1.0, rel=1e-9)

    def test_static_undamped_pole(self, cp6):
        from archswitch.analytic import switch_time_static_undamped

        run = integrate_normal_form(cp6.K, 0.0, eps=1e-2, inertial=True)
        assert run.tau_switch == pytest.approx(switch_time_static_undamped(cp6.K, 1e-2), rel=1e-4)

    def test_ramp_damped_pole(self, cp6):
        from archswitch.analytic import switch_time_ramp_damped

        run = integrate_normal_form(cp6.K, 100.0, nu=10.0)
        assert run.tau_switch == pytest.approx(switch_time_ramp_damped(cp6.K, 10.0, 100.0).delay, rel=1e-8)

    @pytest.mark.parametrize("inertial", [False, True])
    def test_cutoff_insensitive(self, cp6, inertial):
        taus = [
            integrate_normal_form(cp6.K, 100.0, eps=1e-2, inertial=inertial, cfg=SimulationConfig(cutoff=L)).tau_switch
            for L in (1e4, 1e5, 1e6, 1e7, 1e8)
        ]
        assert max(taus) / min(taus) - 1.0 < 1e-3

    def test_rejects_both_loads(self):
        with pytest.raises(ValidationError):
            integrate_normal_form(1.0, 1.0, eps=1.0, nu=1.0)

    def test_ramp_must_start_before_fold(self):
        with pytest.raises(ValidationError):
            integrate_normal_form(1.0, 1.0, nu=1.0, start=0.5)
