"""Global-best particle swarm optimization with box bounds and constraints.

Velocity and position update for particle ``i`` at generation ``k``::

    v <- w(k) * v + alpha1 * b1 * (P_i - x) + alpha2 * b2 * (G - x)
    x <- x + v

with ``b1, b2 ~ U[0, 1]`` drawn per particle and dimension, ``P_i`` the
personal best and ``G`` the swarm best. Positions are clamped to the box
(the velocity component of a clamped dimension is zeroed) and velocities
are limited to a fraction of the box width.

Candidates are ranked with feasibility rules, so no penalty weights are
needed: a feasible point beats an infeasible one, two feasible points
compare by fitness and two infeasible points by total constraint violation.

The evaluator is a batch callable ``evaluate(X) -> (fitness, constraints)``
with ``X`` of shape ``(n, dim)``, ``fitness`` of shape ``(n,)`` and
``constraints`` of shape ``(n, m)`` (``m`` may be 0). Random numbers are a
pure function of ``(seed, generation)``, so results do not depend on how
the evaluator schedules its work.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .controller import GAIN_NAMES, ControllerGains
from .errors import ConfigError, EvaluatorFailure

TABLE_BOUNDS = ((1.0, 10.0), (1.0, 5.0), (1.0, 15.0), (1.0, 15.0), (1.0, 15.0), (1.0, 15.0))


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 30
    max_generations: int = 30
    alpha1: float = 2.0
    alpha2: float = 2.0
    inertia_start: float = 0.9
    inertia_end: float = 0.4
    velocity_clamp: float = 0.5
    rng_seed: int = 0
    bounds: tuple = TABLE_BOUNDS
    names: tuple = GAIN_NAMES

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) != len(bounds):
            raise ConfigError("names", "need one name per bounded dimension")
        if int(self.swarm_size) != self.swarm_size or self.swarm_size < 2:
            raise ConfigError("swarm_size", "must be an integer >= 2")
        if int(self.max_generations) != self.max_generations or self.max_generations < 1:
            raise ConfigError("max_generations", "must be an integer >= 1")
        for name in ("alpha1", "alpha2", "velocity_clamp"):
            if not getattr(self, name) >= 0:
                raise ConfigError(name, "must be >= 0")
        for name in ("inertia_start", "inertia_end"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(name, "must be finite")
        if int(self.rng_seed) != self.rng_seed or self.rng_seed < 0:
            raise ConfigError("rng_seed", "must be a non-negative integer")
        for name, (lo, hi) in zip(self.names, bounds):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ConfigError(f"bounds.{name}", f"need min < max, got [{lo}, {hi}]")

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def lower(self):
        return np.array([b[0] for b in self.bounds])

    @property
    def upper(self):
        return np.array([b[1] for b in self.bounds])


def inertia_at(config, k):
    """Inertia weight at generation ``k``, linear from start to end value."""
    if not 0 <= k <= config.max_generations:
        raise ValueError(f"generation {k} outside [0, {config.max_generations}]")
    frac = k / config.max_generations
    return config.inertia_start + (config.inertia_end - config.inertia_start) * frac


def better(f_a, v_a, f_b, v_b):
    """Element-wise feasibility-rule comparison: is ``a`` strictly better than ``b``?"""
    f_a, v_a, f_b, v_b = (np.asarray(x, dtype=float) for x in (f_a, v_a, f_b, v_b))
    feas_a = v_a <= 0
    feas_b = v_b <= 0
    return np.where(feas_a & feas_b, f_a < f_b,
                    np.where(feas_a != feas_b, feas_a, v_a < v_b))


def _best_index(fitness, violation):
    feasible = violation <= 0
    key = np.where(feasible, fitness, violation)
    # lexsort: last key is primary; ties go to the lowest index
    return int(np.lexsort((np.arange(len(key)), key, ~feasible))[0])


@dataclass(frozen=True)
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    personal_best: np.ndarray
    personal_best_fitness: float
    personal_best_violation: float


@dataclass
class Swarm:
    """Array-of-particles state. Row ``i`` of every array is particle ``i``."""

    positions: np.ndarray
    velocities: np.ndarray
    fitness: np.ndarray
    violation: np.ndarray
    constraints: np.ndarray
    pbest_positions: np.ndarray
    pbest_fitness: np.ndarray
    pbest_violation: np.ndarray
    pbest_constraints: np.ndarray
    gbest_position: np.ndarray = None
    gbest_fitness: float = np.inf
    gbest_violation: float = np.inf
    gbest_constraints: np.ndarray = None
    evaluations: int = 0

    def __len__(self):
        return len(self.positions)

    def particle(self, i):
        return Particle(self.positions[i].copy(), self.velocities[i].copy(),
                        self.pbest_positions[i].copy(), float(self.pbest_fitness[i]),
                        float(self.pbest_violation[i]))

    def copy(self):
        return replace(self, **{name: np.copy(value) for name, value in vars(self).items()
                                if isinstance(value, np.ndarray)})


def _evaluate(evaluator, X, generation):
    try:
        fitness, constraints = evaluator(X)
    except EvaluatorFailure as exc:
        if exc.generation is None:
            raise EvaluatorFailure(exc.particle, generation, exc.__cause__ or exc) from exc
        raise
    except Exception as exc:
        raise EvaluatorFailure(None, generation, exc) from exc
    fitness = np.asarray(fitness, dtype=float).reshape(len(X))
    constraints = np.asarray(constraints, dtype=float).reshape(len(X), -1)
    fitness = np.where(np.isnan(fitness), np.inf, fitness)
    constraints = np.where(np.isnan(constraints), np.inf, constraints)
    violation = np.maximum(constraints, 0.0).sum(axis=1)
    return fitness, constraints, violation


def _update_bests(swarm):
    improved = better(swarm.fitness, swarm.violation, swarm.pbest_fitness, swarm.pbest_violation)
    swarm.pbest_positions[improved] = swarm.positions[improved]
    swarm.pbest_fitness[improved] = swarm.fitness[improved]
    swarm.pbest_violation[improved] = swarm.violation[improved]
    swarm.pbest_constraints[improved] = swarm.constraints[improved]
    i = _best_index(swarm.pbest_fitness, swarm.pbest_violation)
    if swarm.gbest_position is None or better(swarm.pbest_fitness[i], swarm.pbest_violation[i],
                                              swarm.gbest_fitness, swarm.gbest_violation):
        swarm.gbest_position = swarm.pbest_positions[i].copy()
        swarm.gbest_fitness = float(swarm.pbest_fitness[i])
        swarm.gbest_violation = float(swarm.pbest_violation[i])
        swarm.gbest_constraints = swarm.pbest_constraints[i].copy()


def _rng(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def initialize(config, evaluator):
    """Uniform random positions inside the bounds, zero velocities, evaluated."""
    rng = _rng(config.rng_seed, 0)
    lo, hi = config.lower, config.upper
    X = lo + (hi - lo) * rng.random((config.swarm_size, config.dim))
    fitness, constraints, violation = _evaluate(evaluator, X, 0)
    swarm = Swarm(
        positions=X, velocities=np.zeros_like(X),
        fitness=fitness, violation=violation, constraints=constraints,
        pbest_positions=X.copy(), pbest_fitness=fitness.copy(),
        pbest_violation=violation.copy(), pbest_constraints=constraints.copy(),
        evaluations=len(X),
    )
    i = _best_index(fitness, violation)
    swarm.gbest_position = X[i].copy()
    swarm.gbest_fitness = float(fitness[i])
    swarm.gbest_violation = float(violation[i])
    swarm.gbest_constraints = constraints[i].copy()
    return swarm


def pso_step(swarm, config, k, evaluator, betas=None):
    """Advance the swarm by one generation and return the new swarm.

    ``betas`` optionally overrides the random factors with a pair of
    ``(n, dim)`` arrays; by default they are drawn from ``(seed, k)``.
    """
    new = swarm.copy()
    n, dim = new.positions.shape
    if betas is None:
        b1, b2 = _rng(config.rng_seed, 1, k).random((2, n, dim))
    else:
        b1, b2 = (np.broadcast_to(np.asarray(b, dtype=float), (n, dim)) for b in betas)
    w = inertia_at(config, k)
    x = new.positions
    v = (w * new.velocities
         + config.alpha1 * b1 * (new.pbest_positions - x)
         + config.alpha2 * b2 * (new.gbest_position - x))
    x = x + v
    lo, hi = config.lower, config.upper
    clamped = (x < lo) | (x > hi)
    x = np.clip(x, lo, hi)
    v = np.where(clamped, 0.0, v)
    vmax = config.velocity_clamp * (hi - lo)
    v = np.clip(v, -vmax, vmax)
    new.positions = x
    new.velocities = v
    new.fitness, new.constraints, new.violation = _evaluate(evaluator, x, k + 1)
    new.evaluations += n
    _update_bests(new)
    return new


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_fitness: float
    best_violation: float
    feasible: bool
    mean_fitness: float

    def to_dict(self):
        return {"generation": self.generation, "best_fitness": self.best_fitness,
                "best_violation": self.best_violation, "feasible": self.feasible,
                "mean_fitness": self.mean_fitness}


@dataclass
class OptimizationResult:
    best_position: np.ndarray
    best_fitness: float
    best_constraints: np.ndarray
    best_violation: float
    feasible: bool
    history: list = field(default_factory=list)
    generations_run: int = 0
    seed: int = 0
    evaluations: int = 0
    names: tuple = GAIN_NAMES

    @property
    def no_feasible_found(self):
        return not self.feasible

    @property
    def best_gains(self):
        return ControllerGains.from_array(self.best_position)

    def best_dict(self):
        return {name: float(v) for name, v in zip(self.names, self.best_position)}


def optimize(config, evaluator, callback=None):
    """Run the swarm for ``config.max_generations`` generations.

    ``callback(generation, swarm)`` is called after every generation; a
    truthy return value stops the run early. Never raises when no feasible
    point is found; check ``result.feasible`` instead.
    """
    swarm = initialize(config, evaluator)
    history = []
    for k in range(config.max_generations):
        swarm = pso_step(swarm, config, k, evaluator)
        finite = swarm.fitness[np.isfinite(swarm.fitness)]
        history.append(GenerationRecord(
            generation=k + 1,
            best_fitness=swarm.gbest_fitness,
            best_violation=swarm.gbest_violation,
            feasible=bool(swarm.gbest_violation <= 0),
            mean_fitness=float(finite.mean()) if finite.size else float("inf"),
        ))
        if callback is not None and callback(k + 1, swarm):
            break
    return OptimizationResult(
        best_position=swarm.gbest_position.copy(),
        best_fitness=swarm.gbest_fitness,
        best_constraints=swarm.gbest_constraints.copy(),
        best_violation=swarm.gbest_violation,
        feasible=bool(swarm.gbest_violation <= 0),
        history=history,
        generations_run=len(history),
        seed=config.rng_seed,
        evaluations=swarm.evaluations,
        names=config.names,
    )


def pointwise(func, executor=None):
    """Adapt ``func(x) -> fitness`` or ``(fitness, constraints)`` to a batch evaluator.

    With an ``executor`` (anything with an order-preserving ``map``) points
    are evaluated concurrently.
    """
    def call(i_x):
        i, x = i_x
        try:
            out = func(x)
        except Exception as exc:
            raise EvaluatorFailure(i, None, exc) from exc
        if isinstance(out, tuple):
            f, c = out
            if hasattr(c, "as_array"):
                c = c.as_array()
            return float(f), np.atleast_1d(np.asarray(c, dtype=float))
        return float(out), np.zeros(0)

    def evaluate(X):
        mapper = map if executor is None else executor.map
        results = list(mapper(call, enumerate(np.asarray(X))))
        return (np.array([r[0] for r in results]),
                np.array([r[1] for r in results]).reshape(len(results), -1))

    return evaluate
