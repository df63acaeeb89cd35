"""File formats: CSV matrices and vectors, problem descriptions in JSON.

Matrices are one row per line, comma separated, no header. Vectors are one
value per line. Floats carry 17 significant digits so round trips are exact.
"""

import json

import numpy as np

from .penalty import penalty_from_json
from .solver import Problem, SolverOptions, power_iteration

FLOAT_FMT = "%.17g"


def write_matrix(path, m):
    np.savetxt(path, np.atleast_2d(np.asarray(m, dtype=float)),
               delimiter=",", fmt=FLOAT_FMT)


def read_matrix(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_vector(path, v):
    np.savetxt(path, np.asarray(v, dtype=float).reshape(-1), fmt=FLOAT_FMT)


def read_vector(path):
    return np.loadtxt(path, ndmin=1)


def resolve_gamma(spec, A):
    """Gamma from a JSON spec: fixed value, or c * ||A||^2 via power iteration."""
    if spec is None:
        spec = {"mode": "auto_c", "c": 1.01}
    mode = spec.get("mode")
    if mode == "fixed":
        return float(spec["value"])
    if mode == "auto_c":
        return float(spec.get("c", 1.01)) * power_iteration(A)
    raise ValueError("gamma mode must be 'fixed' or 'auto_c'")


def load_problem(path):
    """Read a problem JSON; file paths inside resolve against the working directory.

    Returns the Problem plus the raw solver options dict (step, max_iters, tol,
    restarts, seed, prox_mode).
    """
    with open(path) as fh:
        cfg = json.load(fh)
    for key in ("A", "d", "penalty"):
        if key not in cfg:
            raise ValueError(f"problem file is missing the '{key}' entry")
    A = read_matrix(cfg["A"])
    d = read_vector(cfg["d"])
    penalty = penalty_from_json(cfg["penalty"])
    gamma = resolve_gamma(cfg.get("gamma"), A)
    solver_cfg = cfg.get("solver", {})
    if not isinstance(solver_cfg, dict):
        raise ValueError("'solver' must be an object")
    return Problem(A, d, penalty, gamma), solver_cfg


def solver_options_from_config(cfg):
    """SolverOptions from the problem file's solver dict; unknown keys rejected."""
    known = {"step", "max_iters", "tol", "patience", "prox_mode", "restarts", "seed"}
    extra = set(cfg) - known
    if extra:
        raise ValueError(f"unknown solver option(s): {sorted(extra)}")
    opts = SolverOptions()
    if "step" in cfg:
        opts.step = float(cfg["step"])
    if "max_iters" in cfg:
        opts.max_iters = int(cfg["max_iters"])
    if "tol" in cfg:
        opts.tol = float(cfg["tol"])
    if "patience" in cfg:
        opts.patience = int(cfg["patience"])
    if "prox_mode" in cfg:
        opts.prox_mode = str(cfg["prox_mode"])
    restarts = int(cfg.get("restarts", 1))
    seed = int(cfg.get("seed", 0))
    return opts, restarts, seed
