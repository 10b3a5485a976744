"""Command-line front end.

    kneetune tune --config run.json --out result.json [--seed N]
    kneetune simulate --config run.json --out traj.csv
    kneetune evaluate --traj traj.csv --constraints run.json

Exit codes: 0 success, 1 configuration/parse/IO error, 2 no feasible
solution found, 3 simulation diverged.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import constraint_params_from_dict, load_json, load_run_config, run_config_from_dict
from .errors import ConfigError, KneetuneError, NonFiniteState
from .evaluation import (ReferenceSpec, constraints_from_response, fitness_se, is_feasible,
                         normalized_response)
from .io import dumps, read_trajectory_csv, result_to_dict, write_json, write_trajectory_csv
from .problem import StepResponseProblem
from .pso import optimize
from .simulation import simulate

log = logging.getLogger("kneetune")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_DIVERGED = 0, 1, 2, 3


def _problem(cfg):
    return StepResponseProblem(plant=cfg.plant, reference=cfg.reference, sim=cfg.sim,
                               constraints=cfg.constraints)


def cmd_tune(config_path, out_path, seed=None):
    cfg = load_run_config(config_path)
    if seed is not None:
        cfg = replace(cfg, pso=replace(cfg.pso, rng_seed=seed))
    problem = _problem(cfg)

    def progress(k, swarm):
        log.info("generation %d: best fitness %.6g, violation %.3g",
                 k, swarm.gbest_fitness, swarm.gbest_violation)

    result = optimize(cfg.pso, problem, callback=progress)
    out_path = Path(out_path)
    write_json(result_to_dict(result, cfg), out_path)
    traj_path = out_path.with_suffix(".csv")
    traj, _, _ = problem.run(result.best_gains)
    write_trajectory_csv(traj, traj_path)
    log.info("wrote %s and %s", out_path, traj_path)
    if not result.feasible:
        print(f"no feasible gains found; best violation {result.best_violation:.6g}",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_simulate(config_path, out_csv):
    cfg = load_run_config(config_path)
    if cfg.gains is None:
        raise ConfigError("gains", "simulate needs explicit controller gains")
    traj = simulate(cfg.plant, cfg.gains, cfg.reference, cfg.sim)
    write_trajectory_csv(traj, out_csv)
    return EXIT_OK


def _constraint_source(data, traj):
    """Constraint parameters and step reference for a standalone evaluation.

    ``data`` is either a bare constraint-parameter object or a full run
    configuration. For a bare object the step is read off the trajectory:
    it starts at the first sampled angle and ends at the last reference.
    """
    if isinstance(data, dict) and set(data) & {"plant", "sim", "reference", "constraints",
                                                "pso", "gains"}:
        cfg = run_config_from_dict(data)
        return cfg.constraints, cfg.reference
    params = constraint_params_from_dict(data, path="")
    try:
        spec = ReferenceSpec(kind="step", theta_start=float(traj.theta[0]),
                             theta_target=float(traj.theta_d[-1]))
    except ConfigError as exc:
        raise ConfigError("traj", f"cannot infer step reference: {exc}") from None
    return params, spec


def cmd_evaluate(traj_csv, constraints_json, stream=None):
    stream = stream or sys.stdout
    traj = read_trajectory_csv(traj_csv)
    params, spec = _constraint_source(load_json(constraints_json), traj)
    y = normalized_response(traj.theta, spec.theta_start, spec.theta_target)
    c = constraints_from_response(traj.t, y, params)
    report = {"fitness": fitness_se(traj), "constraints": c.as_array().tolist(),
              "feasible": is_feasible(c)}
    stream.write(dumps(report))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="kneetune", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune", help="optimize controller gains with PSO")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="JSON result; the best trajectory goes "
                   "next to it with a .csv suffix")
    p.add_argument("--seed", type=int, default=None, help="override pso.rng_seed")

    p = sub.add_parser("simulate", help="simulate the gains given in the config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="fitness and constraints of a trajectory CSV")
    p.add_argument("--traj", required=True)
    p.add_argument("--constraints", required=True,
                   help="constraint parameters object or a full run config")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        if args.command == "tune":
            if args.seed is not None and args.seed < 0:
                raise ConfigError("seed", "must be >= 0")
            return cmd_tune(args.config, args.out, args.seed)
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out)
        return cmd_evaluate(args.traj, args.constraints)
    except NonFiniteState as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (KneetuneError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
