"""Trajectory CSV and JSON report serialization.

Floats are written with 17 significant digits so every value read back is
bit-identical to the one written.
"""

import csv
import json

import numpy as np

from .config import finite_or_none, run_config_to_dict
from .errors import ParseError
from .simulation import CSV_COLUMNS, TrajectoryLog


def _fmt(x):
    return format(float(x), ".17g")


def write_trajectory_csv(log, path):
    cols = log.columns()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i in range(len(log)):
            row = [_fmt(cols[name][i]) for name in CSV_COLUMNS[:-1]]
            row.append(str(int(cols["violations"][i])))
            writer.writerow(row)


def read_trajectory_csv(path):
    """Read a trajectory written by :func:`write_trajectory_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, "empty file") from None
        if tuple(header) != CSV_COLUMNS:
            raise ParseError(1, f"header must be {','.join(CSV_COLUMNS)}")
        rows = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(CSV_COLUMNS):
                raise ParseError(line, f"expected {len(CSV_COLUMNS)} fields, got {len(row)}")
            try:
                values = [float(v) for v in row[:-1]] + [int(row[-1])]
            except ValueError as exc:
                raise ParseError(line, str(exc)) from None
            rows.append(values)
    if not rows:
        raise ParseError(2, "no data rows")
    data = list(zip(*rows))
    arrays = {name: np.array(col, dtype=float) for name, col in zip(CSV_COLUMNS[:-1], data)}
    arrays["violations"] = np.array(data[-1], dtype=np.int64)
    return TrajectoryLog(**arrays)


def result_to_dict(result, config=None):
    out = {
        "best_gains": result.best_dict(),
        "best_fitness": finite_or_none(result.best_fitness),
        "best_constraints": [finite_or_none(c) for c in result.best_constraints],
        "best_violation": finite_or_none(result.best_violation),
        "feasible": result.feasible,
        "generations_run": result.generations_run,
        "evaluations": result.evaluations,
        "seed": result.seed,
        "history": [
            {k: (finite_or_none(v) if isinstance(v, float) else v)
             for k, v in rec.to_dict().items()}
            for rec in result.history
        ],
    }
    if config is not None:
        out["config"] = run_config_to_dict(config)
    return out


def dumps(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
