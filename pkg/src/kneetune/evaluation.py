"""Step reference, squared-error fitness and step-response constraints.

Constraints are evaluated on the normalized response
``y = (theta - theta_start) / (theta_target - theta_start)``, so the band
parameters are fractions of the step magnitude whichever direction the
step goes. A constraint vector is feasible when every entry is <= 0.
"""

from dataclasses import astuple, dataclass

import numpy as np

from .controller import ReferencePoint
from .errors import ConfigError, EmptyLog, WindowError
from .plant import THETA_MAX, THETA_MIN

# slack when assigning sample times to half-open windows [a, b)
_WINDOW_RTOL = 1e-9


@dataclass(frozen=True)
class ReferenceSpec:
    kind: str = "step"
    theta_start: float = -np.pi / 2
    theta_target: float = -np.pi / 4
    step_time: float = 0.0

    def __post_init__(self):
        if self.kind not in ("step", "constant"):
            raise ConfigError("kind", f"must be 'step' or 'constant', got {self.kind!r}")
        for name in ("theta_start", "theta_target"):
            value = getattr(self, name)
            if not (THETA_MIN <= value <= THETA_MAX):
                raise ConfigError(name, f"must lie in [-pi/2, 0], got {value!r}")
        if self.kind == "step" and self.theta_target == self.theta_start:
            raise ConfigError("theta_target", "a step needs theta_target != theta_start")
        if not (np.isfinite(self.step_time) and self.step_time >= 0):
            raise ConfigError("step_time", "must be finite and >= 0")

    @property
    def magnitude(self):
        return self.theta_target - self.theta_start


def reference_at(spec, t):
    """Desired angle, velocity and acceleration at time ``t >= 0``.

    A constant reference holds ``theta_start``. Step derivatives are zero
    everywhere; the impulse at the step instant is not represented.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if spec.kind == "constant" or t < spec.step_time:
        return ReferencePoint(spec.theta_start, 0.0, 0.0)
    return ReferencePoint(spec.theta_target, 0.0, 0.0)


def reference_theta(spec, t):
    """Vectorized desired angle over an array of times."""
    t = np.asarray(t, dtype=float)
    if spec.kind == "constant":
        return np.full_like(t, spec.theta_start)
    return np.where(t < spec.step_time, spec.theta_start, spec.theta_target)


@dataclass(frozen=True)
class ConstraintParams:
    """Band parameters of the step-response constraints.

    ``overtaking``, ``rise_margin``, ``start_margin`` and ``static_error``
    are fractions of the step magnitude. ``rise_time < response_time <
    final_time`` in seconds.
    """

    overtaking: float = 0.02
    rise_margin: float = 0.01
    start_margin: float = 0.01
    static_error: float = 0.01
    response_time: float = 1.0
    rise_time: float = 0.8
    final_time: float = 3.0

    def __post_init__(self):
        for name in ("overtaking", "rise_margin", "start_margin", "static_error"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ConfigError(name, f"must be finite and >= 0, got {value!r}")
        if not (0 < self.rise_time < self.response_time < self.final_time):
            raise ConfigError("rise_time",
                              "need 0 < rise_time < response_time < final_time")


@dataclass(frozen=True)
class ConstraintVector:
    """Five step-response constraint values; feasible iff all are <= 0.

    c1  no early dip below the start value before the rise time
    c2  overshoot before the response time
    c3  response has left the start value between rise and response time
    c4  upper settling band after the response time
    c5  lower settling band after the response time
    """

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float

    def as_array(self):
        return np.array(astuple(self), dtype=float)

    def is_feasible(self):
        return is_feasible(self)

    def total_violation(self):
        return total_violation(self)


def _as_values(c):
    if isinstance(c, ConstraintVector):
        return c.as_array()
    return np.asarray(c, dtype=float)


def is_feasible(c):
    return bool(np.all(_as_values(c) <= 0.0))


def total_violation(c):
    """Sum of positive constraint parts; zero exactly when feasible."""
    return float(np.sum(np.maximum(_as_values(c), 0.0)))


def fitness_se(log):
    """Mean over all samples of ``angle_error**2 + velocity_error**2``."""
    return fitness_from_arrays(log.theta, log.theta_dot, log.theta_d, log.theta_d_dot)


def fitness_from_arrays(theta, theta_dot, theta_d, theta_d_dot):
    theta = np.asarray(theta, dtype=float)
    if theta.size == 0:
        raise EmptyLog("fitness of an empty log is undefined")
    err = theta - np.asarray(theta_d, dtype=float)
    err_dot = np.asarray(theta_dot, dtype=float) - np.asarray(theta_d_dot, dtype=float)
    return float(np.mean(err * err + err_dot * err_dot))


def _window(t, start, stop):
    tol_a = _WINDOW_RTOL * max(1.0, abs(start))
    tol_b = _WINDOW_RTOL * max(1.0, abs(stop))
    return (t >= start - tol_a) & (t < stop - tol_b)


def normalized_response(theta, theta_start, theta_target):
    return (np.asarray(theta, dtype=float) - theta_start) / (theta_target - theta_start)


def constraints_from_response(t, y, params):
    """Constraint vector of a normalized response ``y`` sampled at times ``t``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size == 0:
        raise EmptyLog("no samples")
    if t[-1] < params.final_time - _WINDOW_RTOL * max(1.0, params.final_time):
        raise WindowError(
            f"trajectory ends at t={t[-1]:.6g} s but constraints need t_f={params.final_time:.6g} s"
        )
    early = _window(t, 0.0, params.rise_time)
    before_response = _window(t, 0.0, params.response_time)
    rising = _window(t, params.rise_time, params.response_time)
    settled = _window(t, params.response_time, params.final_time)
    for name, mask in (("[0, t_m)", early), ("[t_m, t_r)", rising), ("[t_r, t_f)", settled)):
        if not mask.any():
            raise WindowError(f"no samples in window {name}")
    return ConstraintVector(
        c1=float(-y[early].min() - params.start_margin),
        c2=float(y[before_response].max() - (params.overtaking + 1.0)),
        c3=float(-y[rising].min() + params.rise_margin),
        c4=float(y[settled].max() - (1.0 + params.static_error)),
        c5=float(-y[settled].min() + (1.0 - params.static_error)),
    )


def step_constraints(log, params, spec):
    """Evaluate the five step-response constraints on a trajectory log."""
    if spec.kind != "step":
        raise ValueError("step constraints need a step reference")
    y = normalized_response(log.theta, spec.theta_start, spec.theta_target)
    return constraints_from_response(log.t, y, params)
