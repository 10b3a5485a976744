"""Step-response tuning problem: gain vectors in, fitness and constraints out."""

from dataclasses import dataclass, field

import numpy as np

from .evaluation import ConstraintParams, ReferenceSpec, fitness_se, step_constraints
from .plant import PlantParams
from .simulation import SimConfig, simulate, simulate_batch

N_CONSTRAINTS = 5


@dataclass(frozen=True)
class StepResponseProblem:
    """Batch evaluator for the optimizer.

    A candidate whose simulation diverges gets infinite fitness and
    infinite constraint values, so it loses against every finite one.
    ``chunk_size`` splits large batches; results do not depend on it.
    """

    plant: PlantParams = field(default_factory=PlantParams)
    reference: ReferenceSpec = field(default_factory=ReferenceSpec)
    sim: SimConfig = field(default_factory=SimConfig)
    constraints: ConstraintParams = field(default_factory=ConstraintParams)
    chunk_size: int = 0

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        size = self.chunk_size or len(X)
        fitness = np.empty(len(X))
        cons = np.empty((len(X), N_CONSTRAINTS))
        for start in range(0, len(X), size):
            logs = simulate_batch(self.plant, X[start:start + size], self.reference, self.sim)
            for j, log in enumerate(logs, start):
                fitness[j], cons[j] = self.score(log)
        return fitness, cons

    def score(self, log):
        if log.diverged_at is not None:
            return np.inf, np.full(N_CONSTRAINTS, np.inf)
        c = step_constraints(log, self.constraints, self.reference)
        return fitness_se(log), c.as_array()

    def run(self, gains):
        """Simulate one gain vector; returns ``(log, fitness, ConstraintVector)``."""
        log = simulate(self.plant, gains, self.reference, self.sim)
        return log, fitness_se(log), step_constraints(log, self.constraints, self.reference)
