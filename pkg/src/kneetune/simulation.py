"""Fixed-step RK4 integration of the closed loop (plant + adaptive controller).

The integrated state has six components: joint angle, joint velocity and
the four parameter estimates. The controller is evaluated at every RK4
stage from the stage state. Integration is vectorized over a batch of gain
vectors so a whole swarm can be simulated in one pass; each batch member
follows exactly the same floating-point path as a lone simulation.
"""

from dataclasses import dataclass, field, fields

import numpy as np

from .controller import (DEFAULT_TORQUE_LIMIT, ControllerGains, _rates,
                         _torque_unclamped, lyapunov_value)
from .errors import ConfigError, NonFiniteState
from .evaluation import ReferenceSpec, reference_at
from .plant import DEFAULT_DEADBAND, THETA_MIN, PlantParams, _accel, envelope_flags

SATURATION_FLAG = 4
CSV_COLUMNS = ("t", "theta", "theta_dot", "theta_d", "theta_d_dot", "torque", "s",
               "V", "I_hat", "C_s_hat", "C_v_hat", "Gamma_g_hat", "violations")


@dataclass(frozen=True)
class SimState:
    """Initial joint state and initial parameter estimates.

    The estimates default to the nominal model (the default plant
    parameters). Starting them at zero is allowed, but then the gravity
    term has to be learned from scratch. With the default plant and step, no
    gains inside the default bounds can meet the 1 s settling band that way.
    """

    theta: float = THETA_MIN
    theta_dot: float = 0.0
    I_hat: float = 0.4
    C_s_hat: float = 0.6
    C_v_hat: float = 0.2
    Gamma_g_hat: float = 4.0

    def __post_init__(self):
        for f in fields(self):
            if not np.isfinite(getattr(self, f.name)):
                raise ConfigError(f.name, "must be finite")

    def as_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_final: float = 3.0
    initial_state: SimState = field(default_factory=SimState)
    torque_limit: float = DEFAULT_TORQUE_LIMIT
    sign_deadband: float = DEFAULT_DEADBAND

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError("dt", "must be > 0")
        if not (np.isfinite(self.t_final) and self.t_final >= self.dt):
            raise ConfigError("t_final", "must be >= dt")
        n = round(self.t_final / self.dt)
        if abs(n * self.dt - self.t_final) > 1e-9 * self.t_final:
            raise ConfigError("dt", f"dt={self.dt!r} does not divide t_final={self.t_final!r}")
        if not (np.isfinite(self.torque_limit) and self.torque_limit > 0):
            raise ConfigError("torque_limit", "must be > 0")
        if not (np.isfinite(self.sign_deadband) and self.sign_deadband >= 0):
            raise ConfigError("sign_deadband", "must be >= 0")

    @property
    def n_steps(self):
        return round(self.t_final / self.dt)

    def times(self):
        return np.arange(self.n_steps + 1) * self.dt


@dataclass
class TrajectoryLog:
    """Uniformly sampled closed-loop trajectory, one array per column.

    ``violations`` holds bit flags per row: 1 angle outside [-pi/2, 0],
    2 speed above 3.1 rad/s, 4 torque request saturated. ``stage_saturated``
    has one entry per integration step and is True if any RK4 stage of that
    step hit the torque limit.
    """

    t: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    theta_d: np.ndarray
    theta_d_dot: np.ndarray
    torque: np.ndarray
    s: np.ndarray
    V: np.ndarray
    I_hat: np.ndarray
    C_s_hat: np.ndarray
    C_v_hat: np.ndarray
    Gamma_g_hat: np.ndarray
    violations: np.ndarray
    theta_d_ddot: np.ndarray = None
    stage_saturated: np.ndarray = None
    diverged_at: float = None

    def __post_init__(self):
        if self.theta_d_ddot is None:
            self.theta_d_ddot = np.zeros_like(self.t)

    def __len__(self):
        return len(self.t)

    def columns(self):
        return {name: getattr(self, name) for name in CSV_COLUMNS}

    @property
    def theta_err(self):
        return self.theta - self.theta_d

    @property
    def theta_err_dot(self):
        return self.theta_dot - self.theta_d_dot


def _gain_columns(gains):
    if isinstance(gains, ControllerGains):
        gains = [gains]
    q = np.array([g.as_array() if isinstance(g, ControllerGains) else np.asarray(g, float)
                  for g in gains], dtype=float)
    if q.ndim != 2 or q.shape[1] != 6:
        raise ConfigError("gains", f"expected (n, 6) gain array, got shape {q.shape}")
    if not np.all(np.isfinite(q) & (q > 0)):
        raise ConfigError("gains", "all gains must be finite and > 0")
    return q.T.copy()


class _Gains:
    # column view with attribute access, so lyapunov_value works on arrays
    def __init__(self, cols):
        self.kappa, self.gamma, self.eta1, self.eta2, self.eta3, self.eta4 = cols


def simulate_batch(plant, gains, reference, sim):
    """Simulate one closed loop per gain vector.

    Parameters
    ----------
    plant : PlantParams
    gains : sequence of ControllerGains or array of shape (n, 6)
    reference : ReferenceSpec
    sim : SimConfig

    Returns
    -------
    list of TrajectoryLog
        One log per gain vector. Members whose state went non-finite carry
        ``diverged_at`` (time of the last finite row) and NaN-filled tails.
    """
    g = _Gains(_gain_columns(gains))
    n = g.kappa.shape[0]
    dt = sim.dt
    steps = sim.n_steps
    eps = sim.sign_deadband
    limit = sim.torque_limit
    I, Gg, Cs, Cv = (plant.inertia, plant.gravity_torque, plant.solid_friction,
                     plant.viscous_friction)

    def rhs(t, x):
        ref = reference_at(reference, t)
        theta, theta_dot = x[0], x[1]
        raw = _torque_unclamped(theta, theta_dot, ref.theta_d, ref.theta_d_dot,
                                ref.theta_d_ddot, x[2], x[3], x[4], x[5],
                                g.kappa, g.gamma, eps)
        torque = np.clip(raw, -limit, limit)
        accel = _accel(theta, theta_dot, torque, 0.0, I, Gg, Cs, Cv, eps)
        err_dot = theta_dot - ref.theta_d_dot
        s = err_dot + g.gamma * (theta - ref.theta_d)
        rates = _rates(theta, theta_dot, ref.theta_d_ddot, err_dot, s, g.gamma,
                       g.eta1, g.eta2, g.eta3, g.eta4, eps)
        return np.array([theta_dot, accel, *rates]), torque, np.abs(raw) > limit

    t = sim.times()
    X = np.empty((steps + 1, 6, n))
    torque = np.empty((steps + 1, n))
    row_sat = np.empty((steps + 1, n), dtype=bool)
    stage_sat = np.empty((steps, n), dtype=bool)
    X[0] = sim.initial_state.as_array()[:, None]
    alive = np.ones(n, dtype=bool)
    last_good = np.full(n, t[-1])

    with np.errstate(all="ignore"):
        for k in range(steps):
            tk = t[k]
            x = X[k]
            k1, torque[k], row_sat[k] = rhs(tk, x)
            k2, _, sat2 = rhs(tk + dt / 2, x + (dt / 2) * k1)
            k3, _, sat3 = rhs(tk + dt / 2, x + (dt / 2) * k2)
            k4, _, sat4 = rhs(tk + dt, x + dt * k3)
            X[k + 1] = x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            stage_sat[k] = row_sat[k] | sat2 | sat3 | sat4
            finite = np.isfinite(X[k + 1]).all(axis=0)
            newly_bad = alive & ~finite
            if newly_bad.any():
                last_good[newly_bad] = tk
                alive &= finite
                if not alive.any():
                    X[k + 2:] = np.nan
                    torque[k + 1:] = np.nan
                    row_sat[k + 1:] = False
                    stage_sat[k + 1:] = False
                    break
        else:
            _, torque[steps], row_sat[steps] = rhs(t[steps], X[steps])

        theta_d = np.array([reference_at(reference, tk).theta_d for tk in t])
        theta_d_dot = np.array([reference_at(reference, tk).theta_d_dot for tk in t])
        theta_d_ddot = np.array([reference_at(reference, tk).theta_d_ddot for tk in t])
        err = X[:, 0, :] - theta_d[:, None]
        err_dot = X[:, 1, :] - theta_d_dot[:, None]
        s = err_dot + g.gamma * err
        V = lyapunov_value(s, (I - X[:, 2, :], Cs - X[:, 3, :], Cv - X[:, 4, :],
                               Gg - X[:, 5, :]), err, I, g)
        flags = envelope_flags(X[:, 0, :], X[:, 1, :]) | np.where(row_sat, SATURATION_FLAG, 0)

    logs = []
    for j in range(n):
        logs.append(TrajectoryLog(
            t=t.copy(),
            theta=X[:, 0, j].copy(),
            theta_dot=X[:, 1, j].copy(),
            theta_d=theta_d.copy(),
            theta_d_dot=theta_d_dot.copy(),
            torque=torque[:, j].copy(),
            s=s[:, j].copy(),
            V=V[:, j].copy(),
            I_hat=X[:, 2, j].copy(),
            C_s_hat=X[:, 3, j].copy(),
            C_v_hat=X[:, 4, j].copy(),
            Gamma_g_hat=X[:, 5, j].copy(),
            violations=flags[:, j].astype(np.int64),
            theta_d_ddot=theta_d_ddot.copy(),
            stage_saturated=stage_sat[:, j].copy(),
            diverged_at=None if alive[j] else float(last_good[j]),
        ))
    return logs


def simulate(plant, gains, reference, sim):
    """Simulate a single closed loop; raises NonFiniteState on divergence."""
    if not isinstance(gains, ControllerGains):
        gains = ControllerGains.from_array(gains)
    log = simulate_batch(plant, [gains], reference, sim)[0]
    if log.diverged_at is not None:
        raise NonFiniteState(log.diverged_at)
    return log


__all__ = ["SimState", "SimConfig", "TrajectoryLog", "simulate", "simulate_batch",
           "CSV_COLUMNS", "PlantParams", "ReferenceSpec"]
