"""Adaptive tracking controller for the knee joint.

The controller combines a computed-torque term built from online parameter
estimates with a sliding-variable feedback::

    s     = e_dot + gamma * e                       (e = theta - theta_d)
    a     = theta_d_ddot - gamma * e_dot
    Gamma = I_hat*a + C_s_hat*sign(theta_dot) + C_v_hat*theta_dot
            - kappa*s + Gamma_g_hat*cos(theta)

and the estimates follow gradient laws driven by ``s``::

    d(I_hat)/dt       = -eta1 * a * s
    d(C_s_hat)/dt     = -eta2 * sign(theta_dot) * s
    d(C_v_hat)/dt     = -eta3 * theta_dot * s
    d(Gamma_g_hat)/dt = -eta4 * cos(theta) * s
"""

from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import ConfigError
from .plant import DEFAULT_DEADBAND, _accel

GAIN_NAMES = ("kappa", "gamma", "eta1", "eta2", "eta3", "eta4")
DEFAULT_TORQUE_LIMIT = 20.0


@dataclass(frozen=True)
class ControllerGains:
    """The six tunable controller parameters, in optimizer order."""

    kappa: float
    gamma: float
    eta1: float
    eta2: float
    eta3: float
    eta4: float

    def __post_init__(self):
        for name in GAIN_NAMES:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(name, f"gain must be finite and > 0, got {value!r}")

    def as_array(self):
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, q):
        q = np.asarray(q, dtype=float)
        if q.shape != (len(GAIN_NAMES),):
            raise ValueError(f"expected a vector of {len(GAIN_NAMES)} gains, got shape {q.shape}")
        return cls(*(float(v) for v in q))

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Estimates:
    """Online estimates of the plant parameters. No sign restriction."""

    I_hat: float = 0.0
    C_s_hat: float = 0.0
    C_v_hat: float = 0.0
    Gamma_g_hat: float = 0.0


@dataclass(frozen=True)
class ReferencePoint:
    theta_d: float
    theta_d_dot: float = 0.0
    theta_d_ddot: float = 0.0


def sliding_variable(theta_err, theta_err_dot, gamma):
    return theta_err_dot + gamma * theta_err


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite controller input: {v!r}")


def _torque_unclamped(theta, theta_dot, theta_d, theta_d_dot, theta_d_ddot,
                      I_hat, C_s_hat, C_v_hat, Gamma_g_hat, kappa, gamma, eps):
    err = theta - theta_d
    err_dot = theta_dot - theta_d_dot
    s = err_dot + gamma * err
    sgn = np.where(np.abs(theta_dot) <= eps, 0.0, np.sign(theta_dot))
    return (I_hat * (theta_d_ddot - gamma * err_dot) + C_s_hat * sgn
            + C_v_hat * theta_dot - kappa * s + Gamma_g_hat * np.cos(theta))


def _rates(theta, theta_dot, theta_d_ddot, err_dot, s, gamma,
           eta1, eta2, eta3, eta4, eps):
    sgn = np.where(np.abs(theta_dot) <= eps, 0.0, np.sign(theta_dot))
    return (-eta1 * (theta_d_ddot - gamma * err_dot) * s,
            -eta2 * sgn * s,
            -eta3 * theta_dot * s,
            -eta4 * np.cos(theta) * s)


def control_torque_unclamped(state, ref, est, gains, eps=DEFAULT_DEADBAND):
    """Control torque before actuator saturation."""
    _check_finite(state.theta, state.theta_dot, ref.theta_d, ref.theta_d_dot,
                  ref.theta_d_ddot, *astuple(est))
    return float(_torque_unclamped(
        state.theta, state.theta_dot, ref.theta_d, ref.theta_d_dot, ref.theta_d_ddot,
        est.I_hat, est.C_s_hat, est.C_v_hat, est.Gamma_g_hat,
        gains.kappa, gains.gamma, eps))


def control_torque(state, ref, est, gains, torque_limit=DEFAULT_TORQUE_LIMIT,
                   eps=DEFAULT_DEADBAND):
    """Actuator torque, saturated to ``[-torque_limit, torque_limit]``."""
    if not torque_limit > 0:
        raise ValueError("torque_limit must be > 0")
    raw = control_torque_unclamped(state, ref, est, gains, eps)
    return min(max(raw, -torque_limit), torque_limit)


def adaptation_rates(state, ref, s, gains, eps=DEFAULT_DEADBAND):
    """Time derivatives of ``(I_hat, C_s_hat, C_v_hat, Gamma_g_hat)``."""
    err_dot = state.theta_dot - ref.theta_d_dot
    rates = _rates(state.theta, state.theta_dot, ref.theta_d_ddot, err_dot, s,
                   gains.gamma, gains.eta1, gains.eta2, gains.eta3, gains.eta4, eps)
    return tuple(float(r) for r in rates)


def lyapunov_value(s, param_errors, theta_err, true_inertia, gains):
    """Lyapunov function of the closed loop.

    ``param_errors`` holds ``true - estimate`` for ``(I, C_s, C_v, Gamma_g)``.
    Works element-wise on arrays; ``gains`` may then hold array fields.
    """
    e_I, e_Cs, e_Cv, e_G = param_errors
    return (0.5 * true_inertia * s ** 2
            + e_I ** 2 / (2 * gains.eta1)
            + e_Cs ** 2 / (2 * gains.eta2)
            + e_Cv ** 2 / (2 * gains.eta3)
            + e_G ** 2 / (2 * gains.eta4)
            + gains.kappa * gains.gamma * theta_err ** 2)


def closed_loop_terms(state, ref, est, gains, plant, torque, eps=DEFAULT_DEADBAND):
    """Both sides of the closed-loop sliding dynamics (passive wearer).

    Returns ``(lhs, rhs)`` where ``lhs = I * s_dot`` is computed from the
    plant acceleration under ``torque`` and ``rhs`` is the error-form
    expression ``-kappa*s - I~*a - C_s~*sign - C_v~*theta_dot - Gamma_g~*cos``.
    The two agree whenever ``torque`` is the unsaturated control torque.
    """
    err = state.theta - ref.theta_d
    err_dot = state.theta_dot - ref.theta_d_dot
    s = err_dot + gains.gamma * err
    a = ref.theta_d_ddot - gains.gamma * err_dot
    accel = _accel(state.theta, state.theta_dot, torque, 0.0, plant.inertia,
                   plant.gravity_torque, plant.solid_friction,
                   plant.viscous_friction, eps)
    lhs = plant.inertia * (accel - ref.theta_d_ddot + gains.gamma * err_dot)
    sgn = np.where(np.abs(state.theta_dot) <= eps, 0.0, np.sign(state.theta_dot))
    rhs = (-gains.kappa * s
           - (plant.inertia - est.I_hat) * a
           - (plant.solid_friction - est.C_s_hat) * sgn
           - (plant.viscous_friction - est.C_v_hat) * state.theta_dot
           - (plant.gravity_torque - est.Gamma_g_hat) * np.cos(state.theta))
    return lhs, rhs
