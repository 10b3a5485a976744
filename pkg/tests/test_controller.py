import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kneetune.controller import (ControllerGains, Estimates, ReferencePoint, adaptation_rates,
                                 closed_loop_terms, control_torque, control_torque_unclamped,
                                 lyapunov_value, sliding_variable)
from kneetune.errors import ConfigError
from kneetune.plant import JointState, PlantParams

GAINS = ControllerGains(9.9987, 1.0001, 5.3202, 9.9887, 9.6555, 8.0300)

small = st.floats(-3, 3, allow_nan=False)
positive = st.floats(0.5, 15)


def gains_strategy():
    return st.builds(ControllerGains, *(positive for _ in range(6)))


class TestSlidingVariable:
    def test_zero(self):
        assert sliding_variable(0.0, 0.0, 2.0) == 0.0

    def test_arithmetic(self):
        assert sliding_variable(0.1, -0.05, 2.0) == pytest.approx(0.15, abs=1e-15)

    @given(e=small, ed=small, g=positive)
    def test_odd(self, e, ed, g):
        assert sliding_variable(-e, -ed, g) == -sliding_variable(e, ed, g)


class TestControlTorque:
    def test_zero_estimates_zero_s(self):
        # theta_d chosen so s = 0 at this state
        state = JointState(-1.0, 0.2)
        g = ControllerGains(3, 2, 1, 1, 1, 1)
        ref = ReferencePoint(theta_d=-1.0 + 0.2 / 2, theta_d_dot=0.0)
        assert sliding_variable(state.theta - ref.theta_d, state.theta_dot, g.gamma) == pytest.approx(0, abs=1e-15)
        assert control_torque(state, ref, Estimates(), g) == pytest.approx(0.0, abs=1e-15)

    def test_single_inertia_term(self):
        state = JointState(-1.0, 0.0)
        ref = ReferencePoint(-1.0, 0.0, 1.0)
        assert control_torque(state, ref, Estimates(I_hat=0.3), GAINS) == pytest.approx(0.3)

    def test_saturation(self):
        state = JointState(-1.0, 0.0)
        ref = ReferencePoint(-1.0, 0.0, 1.0)
        est = Estimates(I_hat=25.0)
        assert control_torque_unclamped(state, ref, est, GAINS) == pytest.approx(25.0)
        assert control_torque(state, ref, est, GAINS, torque_limit=20.0) == 20.0
        assert control_torque(state, ReferencePoint(-1.0, 0.0, -1.0), est, GAINS, 20.0) == -20.0

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            control_torque(JointState(math.nan, 0.0), ReferencePoint(0.0), Estimates(), GAINS)
        with pytest.raises(ValueError):
            control_torque(JointState(0.0, 0.0), ReferencePoint(0.0), Estimates(), GAINS, torque_limit=0)

    def test_doubling_kappa_increases_feedback(self):
        state = JointState(-1.2, 0.3)
        ref = ReferencePoint(-0.8)
        g1 = ControllerGains(2, 2, 1, 1, 1, 1)
        g2 = ControllerGains(4, 2, 1, 1, 1, 1)
        est = Estimates()
        t1 = control_torque_unclamped(state, ref, est, g1)
        t2 = control_torque_unclamped(state, ref, est, g2)
        # with zero estimates the torque is exactly the -kappa*s term
        assert abs(t2) > abs(t1) > 0
        assert t2 == pytest.approx(2 * t1)


class TestAdaptationRates:
    def test_zero_s(self):
        assert adaptation_rates(JointState(-1, 0.5), ReferencePoint(-1, 0, 1), 0.0, GAINS) == (0, 0, 0, 0)

    def test_inertia_law(self):
        g = ControllerGains(1, 1, 5, 1, 1, 1)
        rates = adaptation_rates(JointState(-1.0, 0.0), ReferencePoint(-1.0, 0.0, 1.0), 0.2, g)
        assert rates[0] == pytest.approx(-1.0)

    def test_gravity_law(self):
        g = ControllerGains(1, 1, 1, 1, 1, 8)
        rates = adaptation_rates(JointState(0.0, 0.0), ReferencePoint(0.0), 0.1, g)
        assert rates[3] == pytest.approx(-0.8)
        assert rates[1] == 0.0  # inside the sign dead band

    def test_friction_laws(self):
        g = ControllerGains(1, 1, 1, 2, 3, 1)
        rates = adaptation_rates(JointState(-1.0, -0.5), ReferencePoint(-1.0), 0.4, g)
        assert rates[1] == pytest.approx(-2 * -1 * 0.4)
        assert rates[2] == pytest.approx(-3 * -0.5 * 0.4)


class TestLyapunov:
    def test_zero(self):
        assert lyapunov_value(0.0, (0, 0, 0, 0), 0.0, 0.4, GAINS) == 0.0

    def test_kinetic_term(self):
        assert lyapunov_value(1.0, (0, 0, 0, 0), 0.0, 0.4, GAINS) == pytest.approx(0.2)

    def test_each_term(self):
        g = ControllerGains(2, 3, 1, 2, 4, 5)
        v = lyapunov_value(0.0, (1.0, 2.0, 2.0, 1.0), 0.5, 0.4, g)
        assert v == pytest.approx(0.5 + 1.0 + 0.5 + 0.1 + 2 * 3 * 0.25)

    @given(s=small, e1=small, e2=small, e3=small, e4=small, th=small, g=gains_strategy())
    def test_positive_definite(self, s, e1, e2, e3, e4, th, g):
        v = lyapunov_value(s, (e1, e2, e3, e4), th, 0.4, g)
        assert v >= 0
        if any(x != 0 for x in (s, e1, e2, e3, e4, th)):
            # squares of tiny floats can underflow to exactly zero
            if max(abs(x) for x in (s, e1, e2, e3, e4, th)) > 1e-100:
                assert v > 0


class TestClosedLoopIdentity:
    @given(theta=st.floats(-1.6, 0.0), theta_dot=small, theta_d=st.floats(-1.6, 0.0),
           theta_d_dot=small, theta_d_ddot=small, est=st.tuples(small, small, small, small),
           g=gains_strategy())
    def test_sides_agree_unsaturated(self, theta, theta_dot, theta_d, theta_d_dot,
                                     theta_d_ddot, est, g):
        plant = PlantParams()
        state = JointState(theta, theta_dot)
        ref = ReferencePoint(theta_d, theta_d_dot, theta_d_ddot)
        e = Estimates(*est)
        torque = control_torque_unclamped(state, ref, e, g)
        lhs, rhs = closed_loop_terms(state, ref, e, g, plant, torque)
        scale = 1 + abs(torque) + abs(plant.gravity_torque) + g.kappa * (abs(theta_dot) + 5)
        assert abs(lhs - rhs) <= 1e-12 * scale * 100

    def test_saturated_torque_breaks_identity(self):
        plant = PlantParams()
        state = JointState(-1.0, 0.0)
        ref = ReferencePoint(-0.2)
        torque = control_torque(state, ref, Estimates(), GAINS, torque_limit=1.0)
        lhs, rhs = closed_loop_terms(state, ref, Estimates(), GAINS, plant, torque)
        assert abs(lhs - rhs) > 1e-3


def test_gains_validation():
    with pytest.raises(ConfigError):
        ControllerGains(0, 1, 1, 1, 1, 1)
    with pytest.raises(ConfigError):
        ControllerGains(1, 1, 1, 1, 1, math.inf)
    q = GAINS.as_array()
    assert ControllerGains.from_array(q) == GAINS
    with pytest.raises(ValueError):
        ControllerGains.from_array(np.ones(5))
