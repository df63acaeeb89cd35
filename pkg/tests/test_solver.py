"""Forward-backward solver, baselines and regime classification."""

import numpy as np
import pytest

from quadenv import (CardPenalty, L1Penalty, Problem, SolverOptions,
                     TopKIndicator, classify_regime, fbs_multistart, fbs_solve,
                     ista_solve, oracle_solution, power_iteration, q_card_eval)


def test_power_iteration_frozen_values():
    assert power_iteration(np.eye(2)) == pytest.approx(1.0)
    assert power_iteration(np.diag([3.0, 1.0])) == pytest.approx(9.0)
    assert power_iteration(np.ones((2, 2))) == pytest.approx(4.0)
    assert power_iteration(np.zeros((2, 3))) == 0.0


def test_power_iteration_underestimates_tightly():
    rng = np.random.default_rng(1)
    for _ in range(10):
        A = rng.standard_normal((5, 8))
        true = float(np.max(np.linalg.svd(A, compute_uv=False)) ** 2)
        est = power_iteration(A, seed=3)
        assert est <= true * (1.0 + 1e-9)
        assert est >= 0.99 * true


def test_classify_regime_labels():
    A = np.diag([3.0, 1.0])
    assert classify_regime(A, 0.5).label == "convex_minorant"
    assert classify_regime(A, 1.0).label == "convex_minorant"
    assert classify_regime(A, 4.0).label == "indeterminate"
    assert classify_regime(A, 9.5).label == "minima_preserving"
    wide = np.ones((1, 3))
    assert classify_regime(wide, 0.5).minsv_sq == 0.0
    assert classify_regime(wide, 4.0).label == "minima_preserving"


def test_fbs_scalar_hull_mode():
    problem = Problem(np.array([[1.0]]), np.array([1.0]), CardPenalty(1.0), 1.5)
    res = fbs_solve(problem)
    np.testing.assert_allclose(res.x, [0.0], atol=1e-12)
    assert res.objective_trace[-1] == pytest.approx(0.5)
    assert res.config["mode"] == "hull"
    assert res.contact and res.converged


def test_fbs_scalar_exact_mode_convex_regime():
    # A = [2], d = 1, gamma = 1 < sigma_min^2 = 4: the composite objective is
    # convex with interior minimizer (2 - sqrt(2))/3 off the contact set
    problem = Problem(np.array([[2.0]]), np.array([1.0]), CardPenalty(1.0), 1.0)
    res = fbs_solve(problem, opts=SolverOptions(max_iters=20000, tol=1e-14))
    x_star = (2.0 - np.sqrt(2.0)) / 3.0
    j_star = 0.5 - (2.0 - np.sqrt(2.0)) ** 2 / 6.0
    assert res.config["mode"] == "exact"
    np.testing.assert_allclose(res.x, [x_star], atol=1e-6)
    assert res.objective_trace[-1] == pytest.approx(j_star, abs=1e-10)
    assert not res.contact


def test_fbs_trace_is_monotone():
    rng = np.random.default_rng(21)
    for trial in range(6):
        m, n = 5, 8
        A = rng.standard_normal((m, n)) / np.sqrt(m)
        d = rng.standard_normal(m)
        gamma = 1.01 * float(np.max(np.linalg.svd(A, compute_uv=False)) ** 2)
        pen = CardPenalty(0.4) if trial % 2 == 0 else TopKIndicator(3)
        res = fbs_solve(Problem(A, d, pen, gamma),
                        x0=rng.standard_normal(n),
                        opts=SolverOptions(max_iters=2000))
        drops = np.diff(res.objective_trace)
        assert np.max(drops) <= 1e-10


def test_fbs_step_validation():
    problem = Problem(np.array([[1.0]]), np.array([1.0]), CardPenalty(1.0), 1.5)
    with pytest.raises(ValueError):
        fbs_solve(problem, opts=SolverOptions(step=2.0))
    with pytest.raises(ValueError):
        fbs_solve(problem, opts=SolverOptions(step=0.5, prox_mode="hull"))
    with pytest.raises(ValueError):
        fbs_solve(problem, opts=SolverOptions(prox_mode="sloppy"))


def test_fbs_topk_requires_hull_step():
    # no closed-form envelope prox at general steps for top-k
    problem = Problem(np.array([[2.0]]), np.array([1.0]), TopKIndicator(1), 1.0)
    with pytest.raises(ValueError, match="hull"):
        fbs_solve(problem)
    ok = Problem(np.array([[2.0]]), np.array([1.0]), TopKIndicator(1), 4.5)
    res = fbs_solve(ok)
    assert res.config["mode"] == "hull"
    # k >= dimension makes the envelope vanish, leaving plain least squares
    np.testing.assert_allclose(res.x, [0.5], atol=1e-8)


def test_fbs_multistart_beats_zero_start():
    # zero start is a local minimum here; a restart must escape it
    A = np.array([[1.0, 0.9], [0.0, 0.1]])
    d = np.array([2.0, 0.0])
    gamma = 1.02 * float(np.max(np.linalg.svd(A, compute_uv=False)) ** 2)
    problem = Problem(A, d, CardPenalty(1.9), gamma)
    single = fbs_solve(problem)
    multi = fbs_multistart(problem, restarts=12, seed=0)
    assert single.objective_trace[-1] == pytest.approx(2.0)
    assert multi.objective_trace[-1] == pytest.approx(1.9, abs=1e-6)
    assert "restart" in multi.config and "start" in multi.config


def test_fbs_multistart_deterministic():
    rng = np.random.default_rng(33)
    A = rng.standard_normal((4, 6))
    d = rng.standard_normal(4)
    gamma = 1.05 * float(np.max(np.linalg.svd(A, compute_uv=False)) ** 2)
    problem = Problem(A, d, CardPenalty(0.5), gamma)
    r1 = fbs_multistart(problem, restarts=6, seed=7)
    r2 = fbs_multistart(problem, restarts=6, seed=7)
    np.testing.assert_array_equal(r1.x, r2.x)
    assert r1.config == r2.config


def test_ista_frozen_values():
    A = np.array([[1.0]])
    d = np.array([1.0])
    res = ista_solve(Problem(A, d, L1Penalty(0.5), 1.0))
    np.testing.assert_allclose(res.x, [0.5], atol=1e-8)
    res = ista_solve(Problem(A, d, L1Penalty(1.0), 1.0))
    np.testing.assert_allclose(res.x, [0.0], atol=1e-10)
    res = ista_solve(Problem(A, d, L1Penalty(2.0), 1.0))
    np.testing.assert_allclose(res.x, [0.0], atol=1e-10)


def test_ista_small_lambda_approaches_least_squares():
    rng = np.random.default_rng(17)
    A = rng.standard_normal((8, 4))
    d = rng.standard_normal(8)
    xls, _, _, _ = np.linalg.lstsq(A, d, rcond=None)
    res = ista_solve(Problem(A, d, L1Penalty(1e-6), 1.0),
                     opts=SolverOptions(max_iters=20000, tol=1e-14))
    np.testing.assert_allclose(res.x, xls, atol=1e-4)


def test_ista_trace_is_monotone():
    rng = np.random.default_rng(19)
    A = rng.standard_normal((10, 30))
    d = rng.standard_normal(10)
    res = ista_solve(Problem(A, d, L1Penalty(0.05), 1.0),
                     opts=SolverOptions(max_iters=500, tol=0.0))
    assert np.max(np.diff(res.objective_trace)) <= 1e-12


def test_ista_rejects_other_penalties():
    problem = Problem(np.eye(2), np.ones(2), CardPenalty(1.0), 1.5)
    with pytest.raises(ValueError):
        ista_solve(problem)


def test_sandwich_in_one_dimension():
    # hull(J) <= J_gamma <= J on a dense grid, exact in the gamma = ||A||^2 case
    from quadenv import GridFunction, grid_convex_envelope

    a, dval, gamma = 1.0, 1.0, 1.0
    xs = np.linspace(-4.0, 4.0, 2001)
    pen = CardPenalty(1.0)
    j = np.array([pen.value(np.array([x])) for x in xs]) + 0.5 * (a * xs - dval) ** 2
    j_gamma = np.array([q_card_eval(np.array([x]), gamma, 1.0) for x in xs]) \
        + 0.5 * (a * xs - dval) ** 2
    hull = grid_convex_envelope(GridFunction(-4.0, 4.0, 2001, j)).values
    assert np.all(j_gamma <= j + 1e-12)
    assert np.max(hull - j_gamma) <= 5.0 * (8.0 / 2000.0)


def test_oracle_solution_basics():
    A = np.eye(3)
    d = np.array([2.0, 0.5, 0.0])
    np.testing.assert_allclose(oracle_solution(A, d, [0]), [2.0, 0.0, 0.0])
    np.testing.assert_allclose(oracle_solution(A, d, []), np.zeros(3))
    with pytest.raises(ValueError):
        oracle_solution(A, d, [0, 0])
    dep = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(ValueError):
        oracle_solution(dep, np.array([1.0, 2.0]), [0, 1])


def test_problem_validation():
    with pytest.raises(ValueError):
        Problem(np.zeros(3), np.zeros(3), CardPenalty(1.0), 1.0)
    with pytest.raises(ValueError):
        Problem(np.zeros((2, 2)), np.zeros(3), CardPenalty(1.0), 1.0)
    with pytest.raises(ValueError):
        Problem(np.zeros((2, 2)), np.zeros(2), CardPenalty(1.0), 0.0)
