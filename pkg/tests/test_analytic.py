import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from archswitch.analytic import (
    RAMP_UNDAMPED_COEFF,
    STATIC_UNDAMPED_COEFF,
    Regime,
    boutroux_coefficient,
    predict,
    switch_time_ramp_damped,
    switch_time_ramp_undamped,
    switch_time_static_damped,
    switch_time_static_undamped,
    trajectory_ramp_damped,
    trajectory_static_damped,
    trajectory_static_undamped_time_of,
)
from archswitch.dynamics import SimulationConfig, integrate_normal_form, simulate_switching
from archswitch.errors import ValidationError
from archswitch.model import LoadProgram, NondimArch
from archswitch.specfun import airy

pos = st.floats(1e-3, 1e3)


class TestStaticLaws:
    def test_damped_unit(self):
        assert switch_time_static_damped(1.0, 1.0, 1.0) == pytest.approx(1.5708, abs=5e-5)

    def test_damped_quadruple_eps(self):
        assert switch_time_static_damped(3.0, 0.8, 2.0) == pytest.approx(2 * switch_time_static_damped(3.0, 3.2, 2.0), rel=1e-15)

    def test_damped_arch_value(self, cp6):
        tau = switch_time_static_damped(cp6.K, 1e-2, 100.0)
        assert tau == pytest.approx(157.08 / math.sqrt(cp6.K * 0.01), rel=1e-5)
        run = integrate_normal_form(cp6.K, 100.0, eps=1e-2)
        assert run.tau_switch == pytest.approx(tau, rel=1e-6)

    def test_undamped_unit(self):
        assert switch_time_static_undamped(1.0, 1.0) == pytest.approx(3.4508, abs=5e-4)
        assert STATIC_UNDAMPED_COEFF == pytest.approx(3.4508, abs=5e-4)

    def test_undamped_eps_times_16(self):
        assert switch_time_static_undamped(2.0, 0.05) == pytest.approx(2 * switch_time_static_undamped(2.0, 0.8), rel=1e-15)

    def test_undamped_against_normal_form(self, cp6):
        run = integrate_normal_form(cp6.K, 0.0, eps=1e-2, inertial=True)
        assert run.tau_switch == pytest.approx(switch_time_static_undamped(cp6.K, 1e-2), rel=1e-6)

    @given(pos, pos, pos, st.floats(0.01, 100.0))
    def test_homogeneity(self, K, eps, c, s):
        assert switch_time_static_damped(s * K, eps / s, c) == pytest.approx(switch_time_static_damped(K, eps, c), rel=1e-13)
        assert switch_time_static_undamped(s * K, eps / s) == pytest.approx(switch_time_static_undamped(K, eps), rel=1e-13)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
    def test_rejects(self, bad):
        with pytest.raises(ValidationError):
            switch_time_static_damped(bad, 1.0, 1.0)
        with pytest.raises(ValidationError):
            switch_time_static_undamped(1.0, bad)


class TestRampLaws:
    def test_damped_unit(self):
        assert switch_time_ramp_damped(1.0, 1.0, 1.0).delay == pytest.approx(2.3381, abs=1e-4)

    def test_damped_nu_times_8(self):
        a = switch_time_ramp_damped(2.0, 3.0, 5.0).delay
        assert switch_time_ramp_damped(2.0, 24.0, 5.0).delay == pytest.approx(a / 2, rel=1e-14)

    def test_undamped_unit(self):
        assert switch_time_ramp_undamped(1.0, 1.0).delay == pytest.approx(3.22, abs=1e-12)

    def test_undamped_nu_times_32(self):
        a = switch_time_ramp_undamped(2.0, 3.0).delay
        assert switch_time_ramp_undamped(2.0, 96.0).delay == pytest.approx(a / 2, rel=1e-14)

    def test_boutroux_chain(self):
        assert boutroux_coefficient() == pytest.approx(3.22, abs=5e-3)
        assert round(boutroux_coefficient(), 2) == RAMP_UNDAMPED_COEFF
        assert (1.25 * 3.4508) ** 0.8 == pytest.approx(boutroux_coefficient(), abs=1e-4)

    @given(pos, pos, pos, st.floats(0.0, 1e4))
    def test_switch_after_fold(self, K, nu, c, tau_c):
        assert switch_time_ramp_damped(K, nu, c, tau_c=tau_c).tau_inf > tau_c
        assert switch_time_ramp_undamped(K, nu, tau_c=tau_c).tau_inf > tau_c

    def test_arch_force_exceeds_fold(self, arch6, cp6):
        load = LoadProgram(nu=10.0)
        pred = predict(arch6, load, cp=cp6)
        assert pred.F_switch > cp6.F_c
        ev, _ = simulate_switching(arch6, load, SimulationConfig(model="overdamped"), cp6)
        assert ev.F_switch > cp6.F_c
        assert ev.F_switch == pytest.approx(pred.F_switch, rel=1e-4)

    def test_damped_against_normal_form(self, cp6):
        run = integrate_normal_form(cp6.K, 100.0, nu=1e3)
        assert run.tau_switch == pytest.approx(switch_time_ramp_damped(cp6.K, 1e3, 100.0).delay, rel=1e-6)


class TestTrajectories:
    def test_static_damped_start(self):
        assert trajectory_static_damped(0.0, 2.0, 0.1, 3.0) == 0.0

    @given(pos, pos, pos)
    def test_static_damped_residual(self, K, eps, c):
        tau_inf = switch_time_static_damped(K, eps, c)
        h = 1e-6 * tau_inf
        for frac in (0.1, 0.5, 0.9):
            t = frac * tau_inf
            y = trajectory_static_damped(t, K, eps, c)
            dy = (trajectory_static_damped(t + h, K, eps, c) - trajectory_static_damped(t - h, K, eps, c)) / (2 * h)
            scale = eps + K * y * y
            assert abs(c * dy - eps - K * y * y) < 1e-9 * scale

    def test_static_damped_pole(self):
        tau_inf = switch_time_static_damped(1.0, 1.0, 1.0)
        assert trajectory_static_damped(tau_inf * (1 - 1e-9), 1.0, 1.0, 1.0) > 1e6
        with pytest.raises(ValidationError):
            trajectory_static_damped(tau_inf, 1.0, 1.0, 1.0)

    def test_undamped_time_of(self, cp6):
        K, eps = cp6.K, 1e-2
        assert trajectory_static_undamped_time_of(0.0, K, eps) == 0.0
        d = math.sqrt(3 * eps / K)
        # energy integral from rest: (y')^2 / 2 = eps y + K y^3 / 3
        ref, _ = quad(lambda y: 1.0 / math.sqrt(2 * (eps * y + K * y**3 / 3)), 0.0, d, epsabs=1e-14, epsrel=1e-13)
        assert trajectory_static_undamped_time_of(d, K, eps) == pytest.approx(ref, rel=1e-10)
        far = trajectory_static_undamped_time_of(1e9, K, eps)
        assert far == pytest.approx(3.4508 * (K * eps) ** -0.25, rel=2e-4)
        assert far == pytest.approx(switch_time_static_undamped(K, eps), rel=1e-6)
        assert trajectory_static_undamped_time_of(math.inf, K, eps) == pytest.approx(switch_time_static_undamped(K, eps), rel=1e-14)

    def test_undamped_time_of_monotone(self):
        d = np.logspace(-6, 6, 50)
        t = trajectory_static_undamped_time_of(d, 2.0, 0.3)
        assert np.all(np.diff(t) > 0)

    def test_ramp_pullback_branch(self):
        y = trajectory_ramp_damped(-100.0, 1.0, 1.0, 1.0)
        assert y == pytest.approx(-math.sqrt(100.0), rel=1e-3)

    def test_ramp_center_value(self):
        K, nu, c = 3.0, 2.0, 5.0
        p = airy(0.0)
        assert p.aip / p.ai == pytest.approx(-0.7290, abs=1e-4)
        y0 = trajectory_ramp_damped(0.0, K, nu, c)
        assert y0 == pytest.approx(K ** (-2 / 3) * (c * nu) ** (1 / 3) * p.aip / p.ai, rel=1e-14)
        assert y0 < 0

    def test_ramp_zero_crossing_before_pole(self):
        K, nu, c = 3.0, 2.0, 5.0
        pole = switch_time_ramp_damped(K, nu, c).delay
        assert trajectory_ramp_damped(0.999 * pole, K, nu, c) > 0
        assert trajectory_ramp_damped(0.0, K, nu, c) < 0

    @pytest.mark.parametrize("frac", [-20.0, -3.0, -0.5, 0.2, 0.7, 0.95])
    def test_ramp_residual(self, frac):
        K, nu, c = 2.0, 3.0, 0.7
        pole = switch_time_ramp_damped(K, nu, c).delay
        t = frac * pole
        h = 1e-6 * pole
        y = trajectory_ramp_damped(t, K, nu, c)
        dy = (trajectory_ramp_damped(t + h, K, nu, c) - trajectory_ramp_damped(t - h, K, nu, c)) / (2 * h)
        scale = abs(nu * t) + K * y * y
        assert abs(c * dy - nu * t - K * y * y) < 1e-9 * scale


class TestPredict:
    def test_regime_selection(self, arch6):
        assert predict(arch6, LoadProgram(epsilon=1e-2)).regime is Regime.STATIC_DAMPED
        assert predict(arch6.with_damping(0.0), LoadProgram(epsilon=1e-2)).regime is Regime.STATIC_UNDAMPED
        assert predict(arch6, LoadProgram(nu=1.0)).regime is Regime.RAMP_DAMPED
        assert predict(arch6, LoadProgram(nu=1.0), damped=False).regime is Regime.RAMP_UNDAMPED

    def test_ramp_timing(self, arch6, cp6):
        pred = predict(arch6, LoadProgram(F0=100.0, nu=10.0), cp=cp6)
        assert pred.tau_c == pytest.approx((cp6.F_c - 100.0) / 10.0)
        assert pred.tau_inf > pred.tau_c
        assert pred.F_switch == pytest.approx(cp6.F_c + 10.0 * pred.delay)

    def test_projection(self):
        arch = NondimArch(Q=6.0, a=(1.0, 0.3), c=100.0)
        from archswitch.statics import critical_point

        cp = critical_point(arch)
        pred = predict(arch, LoadProgram(epsilon=1e-2), cp=cp)
        assert pred.tau_inf == pytest.approx(switch_time_static_damped(cp.K, cp.p * 1e-2, 100.0), rel=1e-15)

    def test_needs_damping(self, arch6):
        with pytest.raises(ValidationError):
            predict(arch6.with_damping(0.0), LoadProgram(epsilon=1e-2), damped=True)
        with pytest.raises(ValidationError):
            predict(arch6, LoadProgram())
