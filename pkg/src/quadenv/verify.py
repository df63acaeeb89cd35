"""Self-contained verification suites behind the `quadenv verify` command.

Each suite replays one structural property of the envelope on fixed seeded
inputs and reports pass/fail with a short detail string. They are lighter
cousins of the full acceptance tests so the CLI stays quick.
"""

from dataclasses import dataclass

import numpy as np

from .envelope import q_transform_eval_engine
from .gridoracle import (GridFunction, SupportEnumSpec, brute_force_global_min,
                         curvature_check, grid_convex_envelope,
                         grid_quad_envelope, sample_penalty)
from .penalty import CardPenalty, q_card_eval
from .solver import Problem, SolverOptions, fbs_multistart, power_iteration


@dataclass
class VerifyResult:
    name: str
    passed: bool
    detail: str


def verify_envelope_identity():
    """Hull of f + (gamma/2)(x-c)^2 minus the shift equals the closed-form envelope."""
    lo, hi, n = -3.0, 3.0, 1501
    xs = np.linspace(lo, hi, n)
    step = (hi - lo) / (n - 1)
    worst = 0.0
    for mu in (1.0, 0.3):
        pen = CardPenalty(mu)
        for gamma in (0.5, 1.0, 2.0):
            for center in (0.0, 1.0, -0.7):
                shift = 0.5 * gamma * (xs - center) ** 2
                fgrid = GridFunction(lo, hi, n, np.array(
                    [pen.value(np.array([x])) for x in xs]) + shift)
                hull = grid_convex_envelope(fgrid)
                closed = np.array([q_card_eval(np.array([x]), gamma, mu) for x in xs]) + shift
                worst = max(worst, float(np.max(np.abs(hull.values - closed))))
    ok = worst <= 5 * step
    return VerifyResult("envelope-identity", ok,
                        f"max |hull - closed form| = {worst:.3e} (tol {5 * step:.3e})")


def verify_monotonicity():
    """Envelope values are nondecreasing in gamma and reach the penalty in the limit."""
    gammas = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
    xs = np.linspace(-3.0, 3.0, 601)
    prev = None
    ok = True
    worst = 0.0
    for gamma in gammas:
        vals = np.array([q_card_eval(np.array([x]), gamma, 1.0) for x in xs])
        if prev is not None:
            drop = float(np.max(prev - vals))
            worst = max(worst, drop)
            if drop > 1e-12:
                ok = False
        prev = vals
    for gamma in (2.0, 4.0, 50.0):
        for x in (1.0, -1.0):
            if abs(q_card_eval(np.array([x]), gamma, 1.0) - 1.0) > 1e-9:
                ok = False
    return VerifyResult("monotonicity", ok,
                        f"max decrease across gamma ladder = {worst:.3e}")


def verify_curvature():
    """Off the contact set the 1D envelope of card has second difference -gamma."""
    lo, hi, n = -3.0, 3.0, 3001
    ok = True
    details = []
    for gamma in (1.0, 2.0, 4.0):
        f = sample_penalty(CardPenalty(1.0), lo, hi, n)
        q = GridFunction(lo, hi, n, np.array(
            [q_card_eval(np.array([x]), gamma, 1.0) for x in f.xs]))
        report = curvature_check(q, f, gamma)
        ok = ok and report.passed
        details.append(f"gamma={gamma:g}: dev {report.max_deviation:.2e} over "
                       f"{report.n_checked} pts")
    return VerifyResult("curvature", ok, "; ".join(details))


def verify_sandwich():
    """In 1D, grid hull of J <= envelope objective <= J when gamma >= ||A||^2."""
    lo, hi, n = -4.0, 4.0, 2001
    xs = np.linspace(lo, hi, n)
    step = (hi - lo) / (n - 1)
    a, dval = 1.0, 1.0
    pen = CardPenalty(1.0)
    ok = True
    worst = -np.inf
    for gamma in (1.0, 1.5, 3.0):
        j = np.array([pen.value(np.array([x])) for x in xs]) + 0.5 * (a * xs - dval) ** 2
        j_gamma = np.array([q_card_eval(np.array([x]), gamma, 1.0) for x in xs]) \
            + 0.5 * (a * xs - dval) ** 2
        hull = grid_convex_envelope(GridFunction(lo, hi, n, j)).values
        if np.max(j_gamma - j) > 1e-12:
            ok = False
        gap = float(np.max(hull - j_gamma))
        worst = max(worst, gap)
        if gap > 5 * step:
            ok = False
    return VerifyResult("sandwich", ok,
                        f"max (hull - envelope objective) = {worst:.3e}")


def verify_minima_preservation(instances=8, restarts=30):
    """Multistart FBS matches support enumeration when gamma > ||A||^2."""
    hits = 0
    for i in range(instances):
        rng = np.random.default_rng(900 + i)
        m, n, k = 6, 10, 3
        A = rng.standard_normal((m, n)) / np.sqrt(m)
        x_true = np.zeros(n)
        sel = rng.choice(n, size=k, replace=False)
        x_true[sel] = rng.choice([-1.0, 1.0], size=k) * (1.0 + np.abs(rng.standard_normal(k)))
        eps = rng.standard_normal(m)
        eps *= 0.2 / np.linalg.norm(eps)
        d = A @ x_true + eps
        pen = CardPenalty(0.3)
        gamma = 1.01 * power_iteration(A, seed=i)
        problem = Problem(A, d, pen, gamma)
        res = fbs_multistart(problem, restarts=restarts, seed=i,
                             opts=SolverOptions(max_iters=5000, tol=1e-12))
        _, best_val = brute_force_global_min(SupportEnumSpec(A, d, pen))
        r = A @ res.x - d
        j_val = pen.value(res.x) + 0.5 * float(r @ r)
        if abs(j_val - best_val) <= 1e-6 and res.contact:
            hits += 1
    ok = hits >= instances - 1
    return VerifyResult("minima-preservation", ok,
                        f"{hits}/{instances} instances matched enumeration")


_SUITES = {
    "envelope-identity": verify_envelope_identity,
    "monotonicity": verify_monotonicity,
    "curvature": verify_curvature,
    "sandwich": verify_sandwich,
    "minima-preservation": verify_minima_preservation,
}


def suite_names():
    return list(_SUITES)


def run_suites(names):
    if "all" in names:
        names = suite_names()
    results = []
    for name in names:
        if name not in _SUITES:
            raise ValueError(f"unknown suite {name!r}; known: {', '.join(suite_names())}")
        results.append(_SUITES[name]())
    return results
