"""Brute-force oracles on uniform 1D grids, plus support enumeration.

These are deliberately simple O(n^2) reference computations used to validate
the closed forms and the ascent engine: a discrete Legendre transform, a lower
convex hull, and the two-pass quadratic envelope (inner Moreau minimization
followed by the outer supremum). Samples at +inf mark points outside the
effective domain; every grid function must keep at least one finite sample.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernels


@dataclass
class GridFunction:
    """Samples of a function on the uniform grid linspace(lo, hi, n)."""

    lo: float
    hi: float
    n: int
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid needs at least two points")
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.hi > self.lo):
            raise ValueError("need finite lo < hi")
        v = np.asarray(self.values, dtype=float).copy()
        if v.shape != (self.n,):
            raise ValueError(f"values must have shape ({self.n},)")
        if np.any(np.isnan(v)) or np.any(v == -np.inf):
            raise ValueError("values must be real or +inf")
        if not np.any(np.isfinite(v)):
            raise ValueError("grid function needs at least one finite sample")
        self.values = v

    @property
    def xs(self):
        return np.linspace(self.lo, self.hi, self.n)

    @property
    def step(self):
        return (self.hi - self.lo) / (self.n - 1)

    @classmethod
    def sample(cls, fn, lo, hi, n):
        xs = np.linspace(lo, hi, n)
        return cls(lo, hi, n, np.array([float(fn(x)) for x in xs]))


def sample_penalty(penalty, lo, hi, n):
    """Sample a separable penalty on a 1D grid through its value() method."""
    return GridFunction.sample(lambda z: penalty.value(np.array([z])), lo, hi, n)


def grid_legendre(g, dual_range=None):
    """Discrete Legendre transform g*(y) = max_x x*y - g(x).

    The dual grid keeps n points on [-S, S] where S is the largest slope
    between consecutive finite samples (default 1 when no two finite samples
    exist, or when all slopes vanish). The chosen bound is recorded in meta.
    """
    xs = g.xs
    vals = g.values
    if dual_range is None:
        finite = np.flatnonzero(np.isfinite(vals))
        if finite.size >= 2:
            fx = xs[finite]
            fv = vals[finite]
            slopes = np.abs(np.diff(fv) / np.diff(fx))
            s_bound = float(np.max(slopes)) if slopes.size else 0.0
        else:
            s_bound = 0.0
        if s_bound == 0.0:
            s_bound = 1.0
    else:
        s_bound = float(dual_range)
        if s_bound <= 0:
            raise ValueError("dual_range must be positive")
    ys = np.linspace(-s_bound, s_bound, g.n)
    out = kernels.legendre_pass(xs, vals, ys)
    return GridFunction(-s_bound, s_bound, g.n, out,
                        meta={"dual_bound": s_bound, "source_range": (g.lo, g.hi)})


def grid_convex_envelope(g, floor=-1e12):
    """Lower convex hull of the finite sample points, evaluated on the grid.

    Returns +inf outside the span of finite samples. Raises when the input
    looks unbounded below (any sample under the configurable floor).
    """
    xs = g.xs
    vals = g.values
    finite = np.flatnonzero(np.isfinite(vals))
    if np.min(vals[finite]) < floor:
        raise ValueError("input appears unbounded below at grid resolution")
    px = xs[finite]
    py = vals[finite]
    # monotone chain, lower boundary only: slopes must be nondecreasing
    hull = []
    for i in range(px.size):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (px[i] - x2) >= (py[i] - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((px[i], py[i]))
    hx = np.array([p[0] for p in hull])
    hy = np.array([p[1] for p in hull])
    out = np.full(g.n, np.inf)
    inside = (xs >= px[0]) & (xs <= px[-1])
    out[inside] = np.interp(xs[inside], hx, hy)
    return GridFunction(g.lo, g.hi, g.n, out)


def grid_quad_envelope(g, gamma):
    """Two-pass quadratic envelope on the grid.

    First pass computes the Moreau lower envelope e(y) = min_w f(w) +
    (gamma/2)(w-y)^2 over grid points, second pass the upper transform
    Q(x) = max_y e(y) - (gamma/2)(x-y)^2. Both maximize over the grid only,
    so values near the boundary see a truncated supremum and functions with
    +inf samples come back finite everywhere (the discrete sup cannot
    produce +inf).
    """
    if not np.isfinite(gamma) or gamma <= 0:
        raise ValueError("gamma must be a positive finite real")
    finite = np.isfinite(g.values)
    if np.any(g.values[finite] < 0):
        raise ValueError("quadratic envelope oracle expects nonnegative samples")
    xs = g.xs
    env = kernels.inner_pass(g.values, xs, gamma)
    out = kernels.outer_pass(env, xs, gamma)
    return GridFunction(g.lo, g.hi, g.n, out, meta={"gamma": gamma})


@dataclass
class CurvatureReport:
    passed: bool
    n_checked: int
    max_deviation: float
    tol_contact: float
    tol_curv: float
    checked_indices: np.ndarray
    second_diffs: np.ndarray


def curvature_check(q, f, gamma, tol_contact=None, tol_curv=None):
    """Check that Q has second difference -gamma off the contact set.

    Interior grid points with Q(x) < f(x) - tol_contact (and a fully finite
    stencil) are tested; the report passes when every centered second
    difference lies within tol_curv of -gamma. Defaults: tol_curv is 10 times
    the grid step, tol_contact is max(1e-8, 2*gamma*h^2), which keeps stencils
    straddling the contact boundary out of the checked set.
    """
    if (q.lo, q.hi, q.n) != (f.lo, f.hi, f.n):
        raise ValueError("Q and f must share the same grid")
    if q.n < 50:
        raise ValueError("grid too coarse for a curvature check (need n >= 50)")
    h = q.step
    if tol_curv is None:
        tol_curv = 10.0 * h
    if tol_contact is None:
        tol_contact = max(1e-8, 2.0 * gamma * h * h)
    qv = q.values
    fv = f.values
    idx = []
    diffs = []
    for i in range(1, q.n - 1):
        if not (np.isfinite(qv[i - 1]) and np.isfinite(qv[i]) and np.isfinite(qv[i + 1])):
            continue
        if not np.isfinite(fv[i]) or qv[i] >= fv[i] - tol_contact:
            continue
        idx.append(i)
        diffs.append((qv[i - 1] - 2.0 * qv[i] + qv[i + 1]) / (h * h))
    idx = np.array(idx, dtype=int)
    diffs = np.array(diffs)
    dev = float(np.max(np.abs(diffs + gamma))) if diffs.size else 0.0
    return CurvatureReport(
        passed=bool(dev <= tol_curv),
        n_checked=int(idx.size),
        max_deviation=dev,
        tol_contact=tol_contact,
        tol_curv=tol_curv,
        checked_indices=idx,
        second_diffs=diffs,
    )


@dataclass
class SupportEnumSpec:
    """Inputs for exhaustive support enumeration on small problems."""

    A: np.ndarray
    d: np.ndarray
    penalty: object
    max_support: int | None = None


def brute_force_global_min(spec):
    """Global minimum of penalty(x) + 0.5||Ax - d||^2 by support enumeration.

    Feasible only for n <= 16. Each support is solved by least squares
    (least-norm on rank-deficient submatrices); the value charged to a support
    is the penalty of its size plus half the squared residual. Ties within
    1e-12 resolve to the lexicographically smallest support tuple.
    """
    from .penalty import CardPenalty, TopKIndicator

    A = np.asarray(spec.A, dtype=float)
    d = np.asarray(spec.d, dtype=float)
    n = A.shape[1]
    if n > 16:
        raise ValueError("support enumeration is limited to n <= 16")
    if isinstance(spec.penalty, CardPenalty):
        max_sz = n
        weight = lambda sz: spec.penalty.mu * sz
    elif isinstance(spec.penalty, TopKIndicator):
        max_sz = min(spec.penalty.k, n)
        weight = lambda sz: 0.0
    else:
        raise ValueError("support enumeration handles card and top-k penalties only")
    if spec.max_support is not None:
        max_sz = min(max_sz, spec.max_support)

    base = 0.5 * float(d @ d)
    best_val = base
    best_support = ()
    best_x = np.zeros(n)
    for size in range(1, max_sz + 1):
        for support in itertools.combinations(range(n), size):
            cols = A[:, support]
            coef, _, _, _ = np.linalg.lstsq(cols, d, rcond=None)
            r = cols @ coef - d
            val = weight(size) + 0.5 * float(r @ r)
            if val < best_val - 1e-12 or (abs(val - best_val) <= 1e-12 and support < best_support):
                best_val = val
                best_support = support
                best_x = np.zeros(n)
                best_x[list(support)] = coef
    return best_x, float(best_val)
