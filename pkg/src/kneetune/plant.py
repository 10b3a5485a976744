"""Single-joint rotational dynamics of the shank coupled to the knee orthosis.

The joint angle ``theta`` is measured relative to the thigh. ``theta = -pi/2``
is the shank hanging at rest, where the gravity torque vanishes. The equation
of motion is::

    I * theta_ddot = -Gamma_g * cos(theta) + Gamma + Gamma_h
                     - C_s * sign(theta_dot) - C_v * theta_dot

All functions accept scalars or numpy arrays (evaluated element-wise), so the
same code integrates one trajectory or a whole swarm of them.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

THETA_MIN = -np.pi / 2
THETA_MAX = 0.0
THETA_DOT_MAX = 3.1
DEFAULT_DEADBAND = 1e-3


@dataclass(frozen=True)
class PlantParams:
    """True physical parameters of the shank + orthosis.

    Defaults are plausible magnitudes for an adult shank with a light
    orthosis, not measured values.
    """

    inertia: float = 0.4
    gravity_torque: float = 4.0
    solid_friction: float = 0.6
    viscous_friction: float = 0.2
    human_torque_bound: float = 5.0

    def __post_init__(self):
        for name in ("inertia", "gravity_torque", "solid_friction",
                     "viscous_friction", "human_torque_bound"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ConfigError(name, f"must be finite, got {value!r}")
        if self.inertia <= 0:
            raise ConfigError("inertia", "must be > 0")
        for name in ("gravity_torque", "solid_friction", "viscous_friction",
                     "human_torque_bound"):
            if getattr(self, name) < 0:
                raise ConfigError(name, "must be >= 0")


@dataclass(frozen=True)
class JointState:
    theta: float
    theta_dot: float

    def envelope_ok(self):
        """True if the state is inside the operating envelope of the device."""
        return (THETA_MIN <= self.theta <= THETA_MAX
                and abs(self.theta_dot) <= THETA_DOT_MAX)


def sign_db(theta_dot, eps=DEFAULT_DEADBAND):
    """Sign function with a dead band: 0 when ``|theta_dot| <= eps``.

    ``eps = 0`` gives the classical sign with ``sign(0) = 0``.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    s = np.sign(theta_dot)
    out = np.where(np.abs(theta_dot) <= eps, 0.0, s)
    return float(out) if np.ndim(out) == 0 else out


def friction_torque(theta_dot, params, eps=DEFAULT_DEADBAND):
    """Solid plus viscous friction torque (opposes motion)."""
    return (-params.solid_friction * sign_db(theta_dot, eps)
            - params.viscous_friction * theta_dot)


def _accel(theta, theta_dot, torque, human_torque, inertia, gravity_torque,
           solid_friction, viscous_friction, eps):
    # unchecked kernel used by the integrator; arguments may be arrays
    sgn = np.where(np.abs(theta_dot) <= eps, 0.0, np.sign(theta_dot))
    return (-gravity_torque * np.cos(theta) + torque + human_torque
            - solid_friction * sgn - viscous_friction * theta_dot) / inertia


def plant_accel(state, torque, human_torque, params, eps=DEFAULT_DEADBAND):
    """Angular acceleration of the joint for applied torque ``torque``.

    Parameters
    ----------
    state : JointState
    torque : float
        Actuator torque in N*m.
    human_torque : float
        Torque delivered by the wearer; must satisfy
        ``|human_torque| <= params.human_torque_bound``.
    params : PlantParams
    eps : float, optional
        Dead band of the friction sign function.

    Returns
    -------
    float
        ``theta_ddot`` in rad/s^2.
    """
    values = (state.theta, state.theta_dot, torque, human_torque)
    if not all(np.isfinite(v) for v in values):
        raise ValueError(f"non-finite input to plant_accel: {values!r}")
    if abs(human_torque) > params.human_torque_bound:
        raise ValueError(
            f"|human_torque|={abs(human_torque)} exceeds bound {params.human_torque_bound}"
        )
    return float(_accel(state.theta, state.theta_dot, torque, human_torque,
                        params.inertia, params.gravity_torque,
                        params.solid_friction, params.viscous_friction, eps))


def envelope_flags(theta, theta_dot):
    """Bit flags for envelope violations: 1 = angle, 2 = velocity."""
    theta = np.asarray(theta)
    theta_dot = np.asarray(theta_dot)
    flags = np.where((theta < THETA_MIN) | (theta > THETA_MAX), 1, 0)
    flags = flags | np.where(np.abs(theta_dot) > THETA_DOT_MAX, 2, 0)
    return flags.astype(np.int64)
