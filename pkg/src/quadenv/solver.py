"""Forward-backward splitting on envelope-regularized least squares.

Solves min_x Q_gamma(f)(x) + 0.5||Ax - d||^2 by iterating a gradient step on
the quadratic fit with a prox step on the envelope. Two prox modes exist:

* "exact": a closed-form prox of the envelope at the given step (card, l1 and
  the other convex penalties), requiring t*gamma < 1 for card;
* "hull": step fixed to exactly 1/gamma, where the penalty's own prox attains
  the envelope's prox objective (the envelope shares its Moreau envelope at
  that parameter), so hard thresholding or top-k projection is an exact
  envelope prox. This is the mode for the minima-preserving regime
  gamma > ||A||^2.

The regime classifier compares gamma against the extreme squared singular
values: sigma_min^2 >= gamma makes the composite objective convex,
||A||^2 < gamma preserves local minima of the original problem.
"""

from dataclasses import dataclass, field

import numpy as np

from .penalty import L1Penalty, _check_gamma


@dataclass
class Problem:
    A: np.ndarray
    d: np.ndarray
    penalty: object
    gamma: float

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2:
            raise ValueError("A must be a 2D array")
        d = np.asarray(self.d, dtype=float).reshape(-1)
        if d.size != A.shape[0]:
            raise ValueError("d length must match the row count of A")
        _check_gamma(self.gamma)
        self.A = A
        self.d = d
        self.gamma = float(self.gamma)


@dataclass
class Regime:
    label: str
    opnorm_sq: float
    minsv_sq: float


@dataclass
class SolverOptions:
    step: float | None = None
    max_iters: int = 100_000
    tol: float = 1e-10
    patience: int = 5
    prox_mode: str = "auto"
    contact_tol: float = 1e-8
    fista: bool = True
    power_iters: int = 200
    power_seed: int = 0


@dataclass
class SolveResult:
    x: np.ndarray
    objective_trace: np.ndarray = field(repr=False)
    iterations: int
    converged: bool
    contact: bool
    config: dict


def power_iteration(A, iters=200, seed=0):
    """Rayleigh estimate of ||A||^2 = ||A^T A||. Always an underestimate."""
    A = np.asarray(A, dtype=float)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1])
    nv = np.linalg.norm(v)
    if nv == 0:
        v = np.ones(A.shape[1])
        nv = np.linalg.norm(v)
    v /= nv
    for _ in range(iters):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
    av = A @ v
    return float(av @ av)


def classify_regime(A, gamma, power_iters=200, power_seed=0):
    """Label the (A, gamma) pair by which structural guarantee applies."""
    _check_gamma(gamma)
    A = np.asarray(A, dtype=float)
    opnorm_sq = power_iteration(A, power_iters, power_seed)
    svals = np.linalg.svd(A, compute_uv=False)
    minsv = float(svals[-1]) if A.shape[0] >= A.shape[1] else 0.0
    minsv_sq = minsv * minsv
    if minsv_sq >= gamma:
        label = "convex_minorant"
    elif opnorm_sq < gamma:
        label = "minima_preserving"
    else:
        label = "indeterminate"
    return Regime(label=label, opnorm_sq=opnorm_sq, minsv_sq=minsv_sq)


def _resolve_step_mode(penalty, gamma, opnorm_sq, opts):
    t_max = 1.0 / max(opnorm_sq, gamma)
    t = opts.step if opts.step is not None else t_max
    if t <= 0 or t > t_max * (1.0 + 1e-9):
        raise ValueError(f"step {t} violates the stability bound 1/max(||A||^2, gamma) = {t_max}")
    mode = opts.prox_mode
    if mode not in ("auto", "exact", "hull"):
        raise ValueError("prox_mode must be auto, exact or hull")
    if mode == "auto":
        mode = "hull" if abs(t * gamma - 1.0) <= 1e-9 else "exact"
    if mode == "hull":
        if abs(t * gamma - 1.0) > 1e-9:
            raise ValueError("hull prox mode requires step exactly 1/gamma")
    else:
        if not hasattr(penalty, "envelope_prox"):
            raise ValueError(
                "no exact envelope prox for this penalty at general steps; "
                "use step 1/gamma (hull prox mode)"
            )
    return t, mode


def fbs_solve(problem, x0=None, opts=None):
    """Forward-backward splitting on the envelope-regularized objective.

    Parameters
    ----------
    problem : Problem
        Data (A, d), the penalty and the envelope parameter gamma.
    x0 : array, optional
        Start point, default zeros.
    opts : SolverOptions, optional
        Step, prox mode, iteration budget and tolerances. The default step is
        1/max(||A||^2, gamma), which lands in hull mode whenever
        gamma >= ||A||^2.

    Returns
    -------
    SolveResult with the iterate, the envelope objective trace (nonincreasing
    up to rounding), and a contact flag telling whether the envelope equals
    the penalty at the solution (within contact_tol), i.e. whether the
    returned objective is also the original objective value.
    """
    opts = opts or SolverOptions()
    A, d, pen, gamma = problem.A, problem.d, problem.penalty, problem.gamma
    if not hasattr(pen, "envelope_value"):
        raise ValueError("penalty must provide a closed-form envelope value")
    opnorm_sq = power_iteration(A, opts.power_iters, opts.power_seed)
    t, mode = _resolve_step_mode(pen, gamma, opnorm_sq, opts)

    x = np.zeros(A.shape[1]) if x0 is None else np.asarray(x0, dtype=float).copy()

    def objective(z):
        r = A @ z - d
        return pen.envelope_value(z, gamma) + 0.5 * float(r @ r)

    trace = [objective(x)]
    flat = 0
    converged = False
    it = 0
    while it < opts.max_iters:
        it += 1
        v = x - t * (A.T @ (A @ x - d))
        x = pen.prox(v, t) if mode == "hull" else pen.envelope_prox(v, t, gamma)
        obj = objective(x)
        trace.append(obj)
        rel = abs(trace[-2] - obj) / max(1.0, abs(obj))
        flat = flat + 1 if rel < opts.tol else 0
        if flat >= opts.patience:
            converged = True
            break
    q_val = pen.envelope_value(x, gamma)
    f_val = pen.value(x)
    contact = bool(f_val - q_val <= opts.contact_tol)
    return SolveResult(
        x=x,
        objective_trace=np.asarray(trace),
        iterations=it,
        converged=converged,
        contact=contact,
        config={"step": t, "mode": mode, "gamma": gamma, "opnorm_sq": opnorm_sq},
    )


def fbs_multistart(problem, restarts=50, seed=0, opts=None, warm_l1_lambda=None):
    """Best-of-N fbs_solve: zero start, one l1 warm start, seeded Gaussians.

    Results compare by final envelope objective; the winner's config records
    the restart index and seed.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    A, d = problem.A, problem.d
    n = A.shape[1]
    starts = [("zero", np.zeros(n))]
    if restarts >= 2:
        lam = warm_l1_lambda
        if lam is None:
            lam = 0.1 * float(np.max(np.abs(A.T @ d)))
        if lam > 0:
            warm_opts = SolverOptions(max_iters=1500, tol=1e-12)
            warm = ista_solve(Problem(A, d, L1Penalty(lam), problem.gamma),
                              opts=warm_opts)
            starts.append(("l1_warm", warm.x))
    xls, _, _, _ = np.linalg.lstsq(A, d, rcond=None)
    scale = max(float(np.linalg.norm(xls)) / np.sqrt(n), 1e-3)
    i = 0
    while len(starts) < restarts:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        starts.append((f"gauss_{i}", 1.5 * scale * rng.standard_normal(n)))
        i += 1
    best = None
    for idx, (tag, x0) in enumerate(starts):
        res = fbs_solve(problem, x0=x0, opts=opts)
        if best is None or res.objective_trace[-1] < best.objective_trace[-1]:
            res.config.update({"restart": idx, "start": tag, "restarts": restarts,
                               "seed": seed})
            best = res
    return best


def ista_solve(problem, x0=None, opts=None):
    """Proximal gradient for the l1-regularized least squares baseline.

    FISTA momentum is on by default with a restart whenever the objective
    would increase, so the recorded trace is monotone.
    """
    opts = opts or SolverOptions()
    if not isinstance(problem.penalty, L1Penalty):
        raise ValueError("ista_solve expects an L1Penalty problem")
    A, d, pen = problem.A, problem.d, problem.penalty
    opnorm_sq = power_iteration(A, opts.power_iters, opts.power_seed)
    # the power estimate is a lower bound of ||A||^2; pad it to stay stable
    t = opts.step if opts.step is not None else 1.0 / (1.01 * max(opnorm_sq, 1e-12))

    x = np.zeros(A.shape[1]) if x0 is None else np.asarray(x0, dtype=float).copy()

    def objective(z):
        r = A @ z - d
        return pen.value(z) + 0.5 * float(r @ r)

    def forward_backward(z):
        return pen.prox(z - t * (A.T @ (A @ z - d)), t)

    trace = [objective(x)]
    y = x.copy()
    tk = 1.0
    flat = 0
    converged = False
    it = 0
    while it < opts.max_iters:
        it += 1
        if opts.fista:
            x_new = forward_backward(y)
            obj = objective(x_new)
            if obj > trace[-1]:
                # momentum overshoot: restart and take a plain step from x
                x_new = forward_backward(x)
                obj = objective(x_new)
                y = x_new.copy()
                tk = 1.0
            else:
                tk_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
                y = x_new + ((tk - 1.0) / tk_next) * (x_new - x)
                tk = tk_next
        else:
            x_new = forward_backward(x)
            obj = objective(x_new)
        rel = abs(trace[-1] - obj) / max(1.0, abs(obj))
        x = x_new
        trace.append(obj)
        flat = flat + 1 if rel < opts.tol else 0
        if flat >= opts.patience:
            converged = True
            break
    return SolveResult(
        x=x,
        objective_trace=np.asarray(trace),
        iterations=it,
        converged=converged,
        contact=True,
        config={"step": t, "mode": "l1", "lambda": pen.lam, "opnorm_sq": opnorm_sq},
    )


def oracle_solution(A, d, support):
    """Least squares on the true support, zero elsewhere.

    Errors out when the support columns are linearly dependent.
    """
    A = np.asarray(A, dtype=float)
    d = np.asarray(d, dtype=float).reshape(-1)
    support = np.asarray(sorted(support), dtype=int)
    if support.size == 0:
        return np.zeros(A.shape[1])
    if np.unique(support).size != support.size:
        raise ValueError("support has repeated indices")
    cols = A[:, support]
    coef, _, rank, _ = np.linalg.lstsq(cols, d, rcond=None)
    if rank < support.size:
        raise ValueError("support columns are linearly dependent")
    x = np.zeros(A.shape[1])
    x[support] = coef
    return x
