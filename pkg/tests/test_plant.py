import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kneetune.errors import ConfigError
from kneetune.plant import (JointState, PlantParams, envelope_flags, friction_torque,
                            plant_accel, sign_db)

finite = st.floats(-50, 50, allow_nan=False)


class TestSignDb:
    @pytest.mark.parametrize("v, eps, expected", [
        (0.0, 1e-3, 0.0),
        (0.5, 1e-3, 1.0),
        (-5e-4, 1e-3, 0.0),
        (-0.5, 1e-3, -1.0),
        (1e-3, 1e-3, 0.0),  # dead band is closed
        (0.0, 0.0, 0.0),
        (1e-12, 0.0, 1.0),
    ])
    def test_examples(self, v, eps, expected):
        assert sign_db(v, eps) == expected

    def test_array(self):
        np.testing.assert_array_equal(sign_db(np.array([-1.0, 0.0, 2e-4, 3.0])), [-1, 0, 0, 1])

    def test_negative_eps(self):
        with pytest.raises(ValueError):
            sign_db(1.0, -1.0)


class TestPlantAccel:
    def test_hanging_equilibrium(self):
        assert plant_accel(JointState(-math.pi / 2, 0.0), 0.0, 0.0, PlantParams()) == pytest.approx(0.0, abs=1e-15)

    def test_gravity_cancelled(self):
        p = PlantParams()
        assert plant_accel(JointState(0.0, 0.0), p.gravity_torque, 0.0, p) == 0.0

    def test_hand_computed(self):
        p = PlantParams(inertia=0.3, gravity_torque=4.0, solid_friction=0.4, viscous_friction=0.1)
        # (-4*cos(-pi/4) + 5 - 0.4 - 0.1) / 0.3
        expected = (-4 * 0.7071067811865476 + 4.5) / 0.3
        assert plant_accel(JointState(-math.pi / 4, 1.0), 5.0, 0.0, p) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(5.5719, abs=5e-5)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            plant_accel(JointState(float("nan"), 0.0), 0.0, 0.0, PlantParams())
        with pytest.raises(ValueError):
            plant_accel(JointState(0.0, 0.0), float("inf"), 0.0, PlantParams())

    def test_rejects_human_torque_above_bound(self):
        with pytest.raises(ValueError):
            plant_accel(JointState(0.0, 0.0), 0.0, 6.0, PlantParams(human_torque_bound=5.0))

    @given(theta=st.floats(-2, 1), theta_dot=finite, g1=finite, g2=finite)
    def test_linear_in_torque(self, theta, theta_dot, g1, g2):
        p = PlantParams()
        s = JointState(theta, theta_dot)
        diff = plant_accel(s, g1 + g2, 0.0, p) - plant_accel(s, g1, 0.0, p)
        assert diff == pytest.approx(g2 / p.inertia, rel=1e-9, abs=1e-9)


class TestFriction:
    @given(v=st.floats(1.001e-3, 100) | st.floats(-100, -1.001e-3))
    def test_odd_symmetry(self, v):
        p = PlantParams()
        assert friction_torque(v, p) == -friction_torque(-v, p)

    def test_passivity_along_free_motion(self):
        # gravity off, no actuation: kinetic energy must never grow
        p = PlantParams(gravity_torque=0.0)
        dt = 1e-3

        def f(x):
            return np.array([x[1], plant_accel(JointState(x[0], x[1]), 0.0, 0.0, p)])

        x = np.array([-1.0, 2.5])
        energy = 0.5 * p.inertia * x[1] ** 2
        for _ in range(3000):
            k1 = f(x)
            k2 = f(x + dt / 2 * k1)
            k3 = f(x + dt / 2 * k2)
            k4 = f(x + dt * k3)
            x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            new_energy = 0.5 * p.inertia * x[1] ** 2
            assert new_energy <= energy + 1e-8
            energy = new_energy
        assert energy < 1e-6


class TestParams:
    @pytest.mark.parametrize("kwargs", [
        {"inertia": 0.0}, {"inertia": -1.0}, {"gravity_torque": -0.1},
        {"solid_friction": -1}, {"viscous_friction": -1}, {"human_torque_bound": -1},
        {"inertia": float("nan")},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            PlantParams(**kwargs)

    def test_envelope(self):
        assert JointState(-1.0, 3.0).envelope_ok()
        assert not JointState(0.1, 0.0).envelope_ok()
        assert not JointState(-1.0, -3.2).envelope_ok()
        np.testing.assert_array_equal(
            envelope_flags([-1.0, 0.1, -2.0, -1.0], [0.0, 0.0, 4.0, -3.5]), [0, 1, 3, 2])
