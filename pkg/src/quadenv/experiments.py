"""Sparse recovery experiment: envelope methods against an l1 sweep.

Each trial draws a Gaussian sensing matrix, a planted sparse signal and
spherical noise of prescribed norm, then measures the distance of each
method's solution to the oracle least-squares solution on the true support.
Rows are deterministic for a fixed config and seed; trials can run on a
thread pool bounded by QUADENV_THREADS.
"""

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from .penalty import CardPenalty, L1Penalty, TopKIndicator
from .solver import (Problem, SolverOptions, fbs_multistart, ista_solve,
                     oracle_solution, power_iteration)

SUPPORT_REL_TOL = 1e-6

_DEFAULT_NOISE = tuple(np.arange(0.0, 5.01, 0.5))
# multipliers of max|A^T d|, swept high to low as a warm-started path; the
# tiny tail is what lets l1 reach the oracle solution in the noiseless case
_DEFAULT_SWEEP = tuple(np.geomspace(0.3, 1e-8, 16))


@dataclass
class ExperimentConfig:
    m: int = 100
    n: int = 200
    true_card: int = 10
    noise_levels: tuple = _DEFAULT_NOISE
    trials_per_level: int = 20
    seed: int = 20240
    methods: tuple = ("l1_sweep", "q_card", "q_topk")
    lambda_sweep: tuple = _DEFAULT_SWEEP
    mu: float = 1.0
    gamma_factor: float = 1.01
    restarts: int = 8
    signal_norm: float = 40.0 / 3.0

    def __post_init__(self):
        if not (0 < self.true_card <= self.n):
            raise ValueError("true_card must lie in [1, n]")
        if self.m < 1:
            raise ValueError("m must be positive")
        if any(lvl < 0 for lvl in self.noise_levels):
            raise ValueError("noise levels must be nonnegative")
        if self.trials_per_level < 1:
            raise ValueError("need at least one trial per level")
        bad = set(self.methods) - {"l1_sweep", "q_card", "q_topk"}
        if bad:
            raise ValueError(f"unknown method(s): {sorted(bad)}")
        self.noise_levels = tuple(float(v) for v in self.noise_levels)
        self.lambda_sweep = tuple(float(v) for v in self.lambda_sweep)
        self.methods = tuple(self.methods)


@dataclass
class ExperimentRow:
    method: str
    noise_level: float
    trial: int
    dist_to_oracle: float
    support_match: bool
    objective: float
    wall_time: float


def recovered_support(x):
    """Indices above a relative magnitude floor (see SUPPORT_REL_TOL)."""
    x = np.asarray(x)
    thr = SUPPORT_REL_TOL * max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
    return frozenset(np.flatnonzero(np.abs(x) > thr).tolist())


def _make_instance(cfg, level_idx, trial):
    level = cfg.noise_levels[level_idx]
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(level_idx, trial))
    rng = np.random.default_rng(ss)
    A = rng.standard_normal((cfg.m, cfg.n)) / np.sqrt(cfg.m)
    support = np.sort(rng.choice(cfg.n, size=cfg.true_card, replace=False))
    signs = rng.choice([-1.0, 1.0], size=cfg.true_card)
    mags = 1.0 + np.abs(rng.standard_normal(cfg.true_card))
    x0 = np.zeros(cfg.n)
    x0[support] = signs * mags
    x0 *= cfg.signal_norm / np.linalg.norm(A @ x0)
    if level > 0:
        eps = rng.standard_normal(cfg.m)
        eps *= level / np.linalg.norm(eps)
    else:
        eps = np.zeros(cfg.m)
    d = A @ x0 + eps
    seed_int = int(ss.generate_state(1)[0])
    return A, d, support, seed_int


def _run_l1_sweep(cfg, A, d, x_oracle, true_support):
    lam_max = float(np.max(np.abs(A.T @ d)))
    factors = sorted(cfg.lambda_sweep, reverse=True)
    opts = SolverOptions(max_iters=3000, tol=1e-12)
    # the warm-started path only needs a rough solve per point; the final
    # smallest-lambda solve sets the reachable precision, and objective
    # flatness scales as the squared distance to the fixed point
    tail_opts = SolverOptions(max_iters=8000, tol=1e-15)
    best = None
    x = None
    for fac in factors:
        lam = fac * lam_max
        if lam <= 0:
            continue
        point_opts = tail_opts if fac == factors[-1] else opts
        res = ista_solve(Problem(A, d, L1Penalty(lam), 1.0), x0=x, opts=point_opts)
        x = res.x
        dist = float(np.linalg.norm(x - x_oracle))
        if best is None or dist < best[0]:
            best = (dist, x.copy(), res.objective_trace[-1])
    dist, x_best, obj = best
    return dist, recovered_support(x_best) == true_support, float(obj)


def _run_envelope_method(cfg, A, d, x_oracle, true_support, penalty, seed_int):
    gamma = cfg.gamma_factor * power_iteration(A, seed=seed_int % (2 ** 31))
    problem = Problem(A, d, penalty, gamma)
    # near the minimum the objective is quadratic in the distance, so the
    # flatness tolerance must be the square of the distance actually wanted
    opts = SolverOptions(max_iters=6000, tol=1e-15)
    res = fbs_multistart(problem, restarts=cfg.restarts, seed=seed_int, opts=opts)
    dist = float(np.linalg.norm(res.x - x_oracle))
    match = recovered_support(res.x) == true_support
    return dist, match, float(res.objective_trace[-1])


def _run_trial(cfg, level_idx, trial):
    level = cfg.noise_levels[level_idx]
    A, d, support, seed_int = _make_instance(cfg, level_idx, trial)
    x_oracle = oracle_solution(A, d, support)
    true_support = frozenset(int(i) for i in support)
    rows = []
    for method in cfg.methods:
        tic = time.perf_counter()
        if method == "l1_sweep":
            dist, match, obj = _run_l1_sweep(cfg, A, d, x_oracle, true_support)
        elif method == "q_card":
            dist, match, obj = _run_envelope_method(
                cfg, A, d, x_oracle, true_support, CardPenalty(cfg.mu), seed_int)
        else:
            dist, match, obj = _run_envelope_method(
                cfg, A, d, x_oracle, true_support, TopKIndicator(cfg.true_card), seed_int)
        rows.append(ExperimentRow(
            method=method,
            noise_level=level,
            trial=trial,
            dist_to_oracle=dist,
            support_match=bool(match),
            objective=obj,
            wall_time=time.perf_counter() - tic,
        ))
    return rows


def worker_count():
    raw = os.environ.get("QUADENV_THREADS", "").strip()
    if raw:
        count = int(raw)
        if count < 1:
            raise ValueError("QUADENV_THREADS must be a positive integer")
        return count
    return 1


def run_fig4(cfg=None):
    """Run the recovery experiment; returns rows sorted by (method, level, trial)."""
    cfg = cfg or ExperimentConfig()
    jobs = [(li, tr)
            for li in range(len(cfg.noise_levels))
            for tr in range(cfg.trials_per_level)]
    workers = worker_count()
    if workers == 1:
        nested = [_run_trial(cfg, li, tr) for li, tr in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            nested = list(pool.map(lambda j: _run_trial(cfg, *j), jobs))
    rows = [row for group in nested for row in group]
    rows.sort(key=lambda r: (r.method, r.noise_level, r.trial))
    return rows


def rows_to_csv(rows, cfg, path):
    """Write rows with two leading metadata comment lines (timestamp, config).

    Byte-identical across runs of the same config and seed, except for the
    timestamp line and the wall_time column.
    """
    cfg_json = json.dumps(asdict(cfg), sort_keys=True)
    with open(path, "w") as fh:
        fh.write(f"# quadenv fig4 generated {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        fh.write(f"# config {cfg_json} support_rel_tol={SUPPORT_REL_TOL:g}\n")
        fh.write("method,noise_level,trial,dist_to_oracle,support_match,objective,wall_time\n")
        for r in rows:
            fh.write("%s,%.17g,%d,%.17g,%d,%.17g,%.17g\n" % (
                r.method, r.noise_level, r.trial, r.dist_to_oracle,
                1 if r.support_match else 0, r.objective, r.wall_time))


def mean_distances(rows, method):
    """Mean dist_to_oracle per noise level for one method, as (levels, means)."""
    levels = sorted({r.noise_level for r in rows})
    means = []
    for lvl in levels:
        vals = [r.dist_to_oracle for r in rows if r.method == method and r.noise_level == lvl]
        means.append(float(np.mean(vals)))
    return levels, means


def match_rate(rows, method, level):
    vals = [r.support_match for r in rows if r.method == method and r.noise_level == level]
    return float(np.mean(vals)) if vals else 0.0
