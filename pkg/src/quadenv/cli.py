"""Command line entry point.

Subcommands: envelope (tabulate f, Q and S on a 1D grid), solve (run the
forward-backward solver on a problem file), verify (replay the structural
property suites), fig4 (the sparse recovery experiment) and oracle (grid
transforms of a sampled or user-supplied function). Exit codes: 0 on success,
1 when a verify suite fails, 2 on bad usage or unreadable input.
"""

import argparse
import json
import sys

import numpy as np

from .envelope import QuadEnvelope, s_transform_eval
from .experiments import (ExperimentConfig, match_rate, mean_distances,
                          rows_to_csv, run_fig4)
from .gridoracle import (GridFunction, grid_convex_envelope, grid_legendre,
                         grid_quad_envelope, sample_penalty)
from .io import FLOAT_FMT, load_problem, solver_options_from_config
from .penalty import CardPenalty, L1Penalty, TopKIndicator
from .solver import classify_regime, fbs_multistart, fbs_solve
from .verify import run_suites, suite_names


def _fmt(x):
    return FLOAT_FMT % x


def _add_penalty_args(p):
    p.add_argument("--penalty", choices=("card", "topk", "l1"), default="card")
    p.add_argument("--mu", type=float, default=1.0, help="card weight")
    p.add_argument("--k", type=int, default=1, help="top-k sparsity bound")
    p.add_argument("--lam", type=float, default=1.0, help="l1 weight")


def _build_penalty(args):
    if args.penalty == "card":
        return CardPenalty(args.mu)
    if args.penalty == "topk":
        return TopKIndicator(args.k)
    return L1Penalty(args.lam)


def _open_out(path):
    return sys.stdout if path is None else open(path, "w")


def cmd_envelope(args):
    penalty = _build_penalty(args)
    env = QuadEnvelope(penalty, args.gamma)
    xs = np.linspace(args.lo, args.hi, args.n)
    out = _open_out(args.out)
    try:
        out.write("x,f,q,s\n")
        for x in xs:
            v = np.array([x])
            f_val = penalty.value(v)
            q_val = env.value(v)
            s_val = s_transform_eval(penalty, args.gamma, v)
            out.write(",".join(_fmt(t) for t in (x, f_val, q_val, s_val)) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_solve(args):
    problem, solver_cfg = load_problem(args.problem)
    opts, restarts, seed = solver_options_from_config(solver_cfg)
    if restarts > 1:
        res = fbs_multistart(problem, restarts=restarts, seed=seed, opts=opts)
    else:
        res = fbs_solve(problem, opts=opts)
    regime = classify_regime(problem.A, problem.gamma)
    payload = {
        "x": [float(v) for v in res.x],
        "objective": res.objective_trace[-1],
        "iterations": res.iterations,
        "converged": res.converged,
        "contact": res.contact,
        "regime": regime.label,
        "gamma": problem.gamma,
        "config": res.config,
    }
    out = _open_out(args.out)
    try:
        json.dump(payload, out, indent=2)
        out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("iteration,objective\n")
            for i, val in enumerate(res.objective_trace):
                fh.write("%d,%s\n" % (i, _fmt(val)))
    return 0


def cmd_verify(args):
    results = run_suites(args.suite)
    failed = 0
    for r in results:
        tag = "pass" if r.passed else "FAIL"
        print(f"[{tag}] {r.name}: {r.detail}")
        failed += 0 if r.passed else 1
    if failed:
        print(f"{failed} suite(s) failed")
        return 1
    print(f"all {len(results)} suite(s) passed")
    return 0


def cmd_fig4(args):
    noise = tuple(float(t) for t in args.noise.split(",")) if args.noise else None
    methods = tuple(args.methods.split(",")) if args.methods else None
    kwargs = dict(m=args.m, n=args.n, true_card=args.card,
                  trials_per_level=args.trials, seed=args.seed,
                  mu=args.mu, restarts=args.restarts)
    if noise is not None:
        kwargs["noise_levels"] = noise
    if methods is not None:
        kwargs["methods"] = methods
    cfg = ExperimentConfig(**kwargs)
    rows = run_fig4(cfg)
    rows_to_csv(rows, cfg, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    for method in cfg.methods:
        levels, means = mean_distances(rows, method)
        rates = [match_rate(rows, method, lvl) for lvl in levels]
        print(f"{method}:")
        for lvl, mean, rate in zip(levels, means, rates):
            print(f"  noise {lvl:4.1f}  mean dist {mean:10.4e}  support match {rate:5.1%}")
    return 0


def _load_grid_csv(path):
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError("grid CSV needs two columns: x,value")
    xs = data[:, 0]
    if xs.size < 2:
        raise ValueError("grid CSV needs at least two rows")
    steps = np.diff(xs)
    if np.any(steps <= 0):
        raise ValueError("grid CSV x column must be strictly increasing")
    if np.max(steps) - np.min(steps) > 1e-9 * max(1.0, np.max(np.abs(xs))):
        raise ValueError("grid CSV must be uniformly spaced")
    return GridFunction(float(xs[0]), float(xs[-1]), xs.size, data[:, 1])


def cmd_oracle(args):
    if args.input:
        grid = _load_grid_csv(args.input)
    else:
        penalty = _build_penalty(args)
        grid = sample_penalty(penalty, args.lo, args.hi, args.n)
    if args.transform == "legendre":
        result = grid_legendre(grid)
    elif args.transform == "hull":
        result = grid_convex_envelope(grid)
    else:
        result = grid_quad_envelope(grid, args.gamma)
    out = _open_out(args.out)
    try:
        out.write("x,value\n")
        for x, v in zip(result.xs, result.values):
            out.write("%s,%s\n" % (_fmt(x), _fmt(v)))
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quadenv",
        description="Quadratic envelopes of sparsity penalties: tabulation, "
                    "solvers, verification and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("envelope", help="tabulate penalty, envelope and S transform")
    _add_penalty_args(p)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--lo", type=float, default=-3.0)
    p.add_argument("--hi", type=float, default=3.0)
    p.add_argument("--n", type=int, default=601)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("solve", help="run the solver on a problem JSON file")
    p.add_argument("problem", help="problem description (JSON)")
    p.add_argument("--out", help="result JSON path (default stdout)")
    p.add_argument("--trace", help="optional objective trace CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run structural property suites")
    p.add_argument("--suite", action="append",
                   choices=suite_names() + ["all"],
                   help="suite name, repeatable (default all)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fig4", help="sparse recovery experiment")
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--card", type=int, default=10)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=20240)
    p.add_argument("--noise", help="comma separated noise norms")
    p.add_argument("--methods", help="comma separated subset of l1_sweep,q_card,q_topk")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_fig4)

    p = sub.add_parser("oracle", help="grid transforms of a 1D function")
    _add_penalty_args(p)
    p.add_argument("--input", help="CSV of x,value rows (overrides penalty flags)")
    p.add_argument("--transform", choices=("legendre", "hull", "quad-envelope"),
                   default="quad-envelope")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--lo", type=float, default=-3.0)
    p.add_argument("--hi", type=float, default=3.0)
    p.add_argument("--n", type=int, default=601)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify" and not args.suite:
        args.suite = ["all"]
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
