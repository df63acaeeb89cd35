"""End-to-end acceptance checks.

Each test prints a single pass/fail line with its runtime and asserts both the
mathematical claim and the time budget. These are the slowest tests in the
suite; everything else gives finer-grained diagnostics when one of these
goes red.
"""

import time

import numpy as np
import pytest

import quadenv as q

RNG_ENTROPY = 20240


def _finish(name, ok, elapsed, budget, detail):
    line = f"criterion {name}: {'PASS' if ok else 'FAIL'} [{elapsed:.1f}s/{budget:.0f}s] {detail}"
    print(line)
    assert ok, line
    assert elapsed < budget, f"criterion {name} over budget: {elapsed:.1f}s"


def _sup_diff_with_inf(a, b):
    """Sup norm that treats +inf as a domain marker: masks must agree."""
    fin_a, fin_b = np.isfinite(a), np.isfinite(b)
    if not np.array_equal(fin_a, fin_b):
        return np.inf
    if not np.any(fin_a):
        return 0.0
    return float(np.max(np.abs(a[fin_a] - b[fin_b])))


def test_criterion_1_envelope_identity():
    tic = time.perf_counter()
    lo, hi, n = -3.0, 3.0, 3001
    xs = np.linspace(lo, hi, n)
    step = (hi - lo) / (n - 1)
    cases = [q.CardPenalty(1.0), q.CardPenalty(0.3), q.TopKIndicator(0)]
    worst = 0.0
    for pen in cases:
        fvals = np.array([pen.value(np.array([x])) for x in xs])
        for gamma in (0.5, 1.0, 2.0):
            qvals = np.array([pen.envelope_value(np.array([x]), gamma) for x in xs])
            for center in (0.0, 1.0, -0.7):
                shift = 0.5 * gamma * (xs - center) ** 2
                hull = q.grid_convex_envelope(
                    q.GridFunction(lo, hi, n, fvals + shift)).values
                worst = max(worst, _sup_diff_with_inf(hull, qvals + shift))
    ok = worst <= 5.0 * step
    _finish("1 envelope-identity", ok, time.perf_counter() - tic, 30.0,
            f"max |hull - (Q + shift)| = {worst:.3e}, tol {5 * step:.3e}")


def test_criterion_2_double_transform_consistency():
    tic = time.perf_counter()
    rng = np.random.default_rng(RNG_ENTROPY)
    worst_engine = 0.0
    for _ in range(200):
        dim = int(rng.integers(1, 7))
        x = rng.uniform(-3.0, 3.0, size=dim)
        gamma = float(rng.choice([0.5, 1.0, 2.0, 4.0]))
        mu = float(rng.choice([0.3, 1.0]))
        diff = abs(q.q_transform_eval_engine(q.CardPenalty(mu), gamma, x)
                   - q.q_card_eval(x, gamma, mu))
        worst_engine = max(worst_engine, diff)
        k = int(rng.integers(1, dim + 1))
        diff = abs(q.q_transform_eval_engine(q.TopKIndicator(k), gamma, x)
                   - q.q_topk_eval(x, gamma, k))
        worst_engine = max(worst_engine, diff)
    worst_grid = 0.0
    f = q.sample_penalty(q.CardPenalty(1.0), -3.0, 3.0, 6001)
    for gamma in (0.5, 1.0, 2.0):
        grid_q = q.grid_quad_envelope(f, gamma).values
        closed = np.array([q.q_card_eval(np.array([x]), gamma, 1.0) for x in f.xs])
        worst_grid = max(worst_grid, float(np.max(np.abs(grid_q - closed))))
    ok = worst_engine <= 1e-5 and worst_grid <= 1e-2
    _finish("2 double-transform", ok, time.perf_counter() - tic, 60.0,
            f"engine dev {worst_engine:.2e} (tol 1e-5), grid dev {worst_grid:.2e} (tol 1e-2)")


def test_criterion_3_curvature():
    tic = time.perf_counter()
    lo, hi, n = -3.0, 3.0, 3001
    f = q.sample_penalty(q.CardPenalty(1.0), lo, hi, n)
    ok = True
    worst = 0.0
    for gamma in (1.0, 2.0, 4.0):
        qgrid = q.GridFunction(lo, hi, n, np.array(
            [q.q_card_eval(np.array([x]), gamma, 1.0) for x in f.xs]))
        report = q.curvature_check(qgrid, f, gamma)
        ok = ok and report.passed and report.n_checked > 100
        worst = max(worst, report.max_deviation)
    _finish("3 curvature", ok, time.perf_counter() - tic, 10.0,
            f"max |d2Q + gamma| = {worst:.2e}, tol {10 * f.step:.2e}")


def test_criterion_4_monotonicity_and_limits():
    tic = time.perf_counter()
    gammas = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
    ok = True
    worst_drop = 0.0
    xs = np.linspace(-3.0, 3.0, 601)
    for mu in (0.3, 1.0):
        prev = None
        for gamma in gammas:
            vals = np.array([q.q_card_eval(np.array([x]), gamma, mu) for x in xs])
            if prev is not None:
                drop = float(np.max(prev - vals))
                worst_drop = max(worst_drop, drop)
                ok = ok and drop <= 1e-12
            prev = vals
    rng = np.random.default_rng(RNG_ENTROPY + 1)
    pts = rng.uniform(-3.0, 3.0, size=(50, 3))
    prev = None
    for gamma in gammas:
        vals = np.array([q.q_topk_eval(p, gamma, 1) for p in pts])
        if prev is not None:
            drop = float(np.max(prev - vals))
            worst_drop = max(worst_drop, drop)
            ok = ok and drop <= 1e-12
        prev = vals
    worst_limit = 0.0
    for gamma in (2.0, 3.0, 8.0, 64.0):
        for x in (1.0, -1.0):
            worst_limit = max(worst_limit, abs(
                q.q_card_eval(np.array([x]), gamma, 1.0) - 1.0))
    ok = ok and worst_limit <= 1e-9
    _finish("4 monotonicity", ok, time.perf_counter() - tic, 10.0,
            f"max gamma-ladder drop {worst_drop:.1e}, |Q(1)-1| dev {worst_limit:.1e}")


def test_criterion_5_minima_preservation():
    tic = time.perf_counter()
    hits = 0
    instances = 20
    for i in range(instances):
        rng = np.random.default_rng(RNG_ENTROPY + 100 + i)
        m, n, k = 6, 10, 3
        A = rng.standard_normal((m, n)) / np.sqrt(m)
        x_true = np.zeros(n)
        sel = rng.choice(n, size=k, replace=False)
        x_true[sel] = rng.choice([-1.0, 1.0], size=k) * (1.0 + np.abs(rng.standard_normal(k)))
        eps = rng.standard_normal(m)
        eps *= 0.2 / np.linalg.norm(eps)
        d = A @ x_true + eps
        pen = q.CardPenalty(0.3)
        gamma = 1.01 * float(np.max(np.linalg.svd(A, compute_uv=False)) ** 2)
        res = q.fbs_multistart(q.Problem(A, d, pen, gamma), restarts=50, seed=i,
                               opts=q.SolverOptions(max_iters=5000, tol=1e-12))
        _, best_val = q.brute_force_global_min(q.SupportEnumSpec(A, d, pen))
        r = A @ res.x - d
        j_val = pen.value(res.x) + 0.5 * float(r @ r)
        if abs(j_val - best_val) <= 1e-6 and res.contact:
            hits += 1
    ok = hits >= 19
    _finish("5 minima-preservation", ok, time.perf_counter() - tic, 120.0,
            f"{hits}/{instances} instances matched enumeration")


def test_criterion_6_convex_regime():
    tic = time.perf_counter()
    gamma = 1.0
    n = 8
    ok = True
    worst_midpoint = -np.inf
    for i in range(20):
        rng = np.random.default_rng(RNG_ENTROPY + 300 + i)
        u, _ = np.linalg.qr(rng.standard_normal((n, n)))
        v, _ = np.linalg.qr(rng.standard_normal((n, n)))
        svals = np.sqrt(2.0 * gamma) * rng.uniform(1.05, 3.0, size=n)
        A = (u * svals) @ v.T
        d = rng.standard_normal(n)
        pen = q.CardPenalty(1.0)

        def j_gamma(z):
            r = A @ z - d
            return pen.envelope_value(z, gamma) + 0.5 * float(r @ r)

        def j_orig(z):
            r = A @ z - d
            return pen.value(z) + 0.5 * float(r @ r)

        for _ in range(50):
            x = rng.uniform(-2.0, 2.0, size=n)
            y = rng.uniform(-2.0, 2.0, size=n)
            gap = j_gamma(0.5 * (x + y)) - 0.5 * (j_gamma(x) + j_gamma(y))
            worst_midpoint = max(worst_midpoint, gap)
            ok = ok and gap <= 1e-9
            ok = ok and j_gamma(x) <= j_orig(x) + 1e-12
    _finish("6 convex-regime", ok, time.perf_counter() - tic, 60.0,
            f"max midpoint-convexity gap {worst_midpoint:.2e} (tol 1e-9)")


def test_criterion_7_recovery_experiment():
    tic = time.perf_counter()
    cfg = q.ExperimentConfig()
    rows = q.run_fig4(cfg)
    details = []
    ok = True
    for method in cfg.methods:
        good = sum(1 for r in rows
                   if r.method == method and r.noise_level == 0.0
                   and r.support_match and r.dist_to_oracle < 1e-6)
        details.append(f"{method} noiseless {good}/20")
        ok = ok and good >= 19
    for level in (1.0, 2.0, 3.0):
        topk_rate = q.match_rate(rows, "q_topk", level)
        l1_rate = q.match_rate(rows, "l1_sweep", level)
        details.append(f"lvl{level:g} topk {topk_rate:.0%} l1 {l1_rate:.0%}")
        ok = ok and topk_rate >= 0.70 and topk_rate > l1_rate
    levels, topk_means = q.mean_distances(rows, "q_topk")
    _, card_means = q.mean_distances(rows, "q_card")
    _, l1_means = q.mean_distances(rows, "l1_sweep")
    for lvl, mt, mc, ml in zip(levels, topk_means, card_means, l1_means):
        if lvl <= 3.0:
            ok = ok and mt <= mc + 1e-8 and mc <= ml + 1e-8
    _finish("7 recovery-experiment", ok, time.perf_counter() - tic, 600.0,
            "; ".join(details))


def test_criterion_8_spectral_consistency():
    tic = time.perf_counter()
    rng = np.random.default_rng(RNG_ENTROPY + 500)
    worst_engine = 0.0
    for base in (q.CardPenalty(1.0), q.TopKIndicator(1)):
        for size in (2, 3):
            pen = q.SpectralPenalty(base, (size, size))
            for _ in range(25):
                x = rng.uniform(-2.0, 2.0, size=(size, size))
                gamma = float(rng.choice([0.5, 1.0, 2.0]))
                diff = abs(q.q_transform_eval_engine(pen, gamma, x)
                           - q.q_spectral_eval(x, gamma, pen))
                worst_engine = max(worst_engine, diff)
    worst_unitary = 0.0
    pen = q.SpectralPenalty(q.CardPenalty(0.7), (3, 3))
    for _ in range(50):
        x = rng.standard_normal((3, 3))
        qq, r = np.linalg.qr(rng.standard_normal((3, 3)))
        u = qq * np.sign(np.diag(r))
        qq, r = np.linalg.qr(rng.standard_normal((3, 3)))
        v = qq * np.sign(np.diag(r))
        gamma = float(rng.uniform(0.5, 3.0))
        diff = abs(q.q_spectral_eval(u @ x @ v.T, gamma, pen)
                   - q.q_spectral_eval(x, gamma, pen))
        worst_unitary = max(worst_unitary, diff)
    ok = worst_engine <= 1e-5 and worst_unitary <= 1e-9
    _finish("8 spectral", ok, time.perf_counter() - tic, 60.0,
            f"engine dev {worst_engine:.2e} (tol 1e-5), unitary dev {worst_unitary:.2e} (tol 1e-9)")
