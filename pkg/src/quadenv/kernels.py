"""Hot numeric kernels: numba loops with vectorized numpy fallbacks.

The backend is chosen once at import from QUADENV_BACKEND (auto, numba or
numpy; default auto picks numba when importable). The grid passes take
float64 arrays on a shared uniform grid, with +inf marking samples outside
the effective domain; the simplex QP pass powers the bundle master problem.
"""

import os

import numpy as np

_CHUNK = 512


def inner_pass_numpy(values, xs, gamma):
    """e[j] = min_w values[w] + (gamma/2)(xs[w]-xs[j])^2, chunked broadcast."""
    n = xs.size
    out = np.empty(n)
    half = 0.5 * gamma
    for j0 in range(0, n, _CHUNK):
        d = xs[j0:j0 + _CHUNK, None] - xs[None, :]
        np.square(d, out=d)
        d *= half
        d += values[None, :]
        out[j0:j0 + _CHUNK] = np.min(d, axis=1)
    return out


def outer_pass_numpy(env, xs, gamma):
    """q[i] = max_j env[j] - (gamma/2)(xs[i]-xs[j])^2."""
    n = xs.size
    out = np.empty(n)
    half = 0.5 * gamma
    for i0 in range(0, n, _CHUNK):
        d = xs[i0:i0 + _CHUNK, None] - xs[None, :]
        np.square(d, out=d)
        d *= -half
        d += env[None, :]
        out[i0:i0 + _CHUNK] = np.max(d, axis=1)
    return out


def legendre_pass_numpy(xs, values, ys):
    """g*[k] = max_j xs[j]*ys[k] - values[j]; +inf samples drop out as -inf."""
    out = np.empty(ys.size)
    for k0 in range(0, ys.size, _CHUNK):
        prod = ys[k0:k0 + _CHUNK, None] * xs[None, :]
        prod -= values[None, :]
        out[k0:k0 + _CHUNK] = np.max(prod, axis=1)
    return out


def simplex_qp_pass_numpy(G, c, lam0, lip, iters, tol):
    """min 0.5 lam@G@lam - c@lam over the probability simplex.

    Accelerated projected gradient with restart on uphill momentum; stops
    once the iterate moves less than tol in max norm.
    """
    lam = lam0.copy()
    z = lam0.copy()
    step = 1.0 / lip
    t = 1.0
    for _ in range(iters):
        grad = G @ z - c
        v = z - step * grad
        u = np.sort(v)[::-1]
        css = np.cumsum(u) - 1.0
        idx = np.arange(1, u.size + 1)
        mask = u * idx > css
        theta = css[mask][-1] / idx[mask][-1]
        nxt = np.maximum(v - theta, 0.0)
        if float(grad @ (nxt - lam)) > 0.0:
            t = 1.0
            z = nxt
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            z = nxt + ((t - 1.0) / t_next) * (nxt - lam)
            t = t_next
        delta = float(np.max(np.abs(nxt - lam)))
        lam = nxt
        if delta <= tol:
            break
    return lam


def _build_numba():
    import numba as nb

    @nb.njit(cache=True)
    def inner_pass(values, xs, gamma):
        n = xs.size
        out = np.empty(n)
        for j in range(n):
            best = np.inf
            xj = xs[j]
            for w in range(n):
                v = values[w]
                if v == np.inf:
                    continue
                dx = xs[w] - xj
                c = v + 0.5 * gamma * dx * dx
                if c < best:
                    best = c
            out[j] = best
        return out

    @nb.njit(cache=True)
    def outer_pass(env, xs, gamma):
        n = xs.size
        out = np.empty(n)
        for i in range(n):
            best = -np.inf
            xi = xs[i]
            for j in range(n):
                dx = xs[j] - xi
                c = env[j] - 0.5 * gamma * dx * dx
                if c > best:
                    best = c
            out[i] = best
        return out

    @nb.njit(cache=True)
    def legendre_pass(xs, values, ys):
        m = ys.size
        n = xs.size
        out = np.empty(m)
        for k in range(m):
            best = -np.inf
            yk = ys[k]
            for j in range(n):
                v = values[j]
                if v == np.inf:
                    continue
                c = xs[j] * yk - v
                if c > best:
                    best = c
            out[k] = best
        return out

    @nb.njit(cache=True)
    def simplex_qp_pass(G, c, lam0, lip, iters, tol):
        k = c.size
        lam = lam0.copy()
        z = lam0.copy()
        step = 1.0 / lip
        t = 1.0
        for _ in range(iters):
            grad = G @ z - c
            v = z - step * grad
            u = np.sort(v)[::-1]
            css = 0.0
            theta = 0.0
            for i in range(k):
                css += u[i]
                cand = (css - 1.0) / (i + 1.0)
                if u[i] > cand:
                    theta = cand
            nxt = np.maximum(v - theta, 0.0)
            up = 0.0
            for i in range(k):
                up += grad[i] * (nxt[i] - lam[i])
            if up > 0.0:
                t = 1.0
                z = nxt.copy()
            else:
                t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
                beta = (t - 1.0) / t_next
                z = nxt + beta * (nxt - lam)
                t = t_next
            delta = 0.0
            for i in range(k):
                d = abs(nxt[i] - lam[i])
                if d > delta:
                    delta = d
            lam = nxt
            if delta <= tol:
                break
        return lam

    return {
        "inner": inner_pass,
        "outer": outer_pass,
        "legendre": legendre_pass,
        "simplex_qp": simplex_qp_pass,
    }


def _select():
    choice = os.environ.get("QUADENV_BACKEND", "auto").strip().lower()
    if choice not in {"auto", "numba", "numpy"}:
        raise ValueError("QUADENV_BACKEND must be one of auto, numba, numpy")
    if choice != "numpy":
        try:
            return "numba", _build_numba()
        except ImportError:
            if choice == "numba":
                raise
    return "numpy", {
        "inner": inner_pass_numpy,
        "outer": outer_pass_numpy,
        "legendre": legendre_pass_numpy,
        "simplex_qp": simplex_qp_pass_numpy,
    }


BACKEND, _IMPL = _select()
inner_pass = _IMPL["inner"]
outer_pass = _IMPL["outer"]
legendre_pass = _IMPL["legendre"]
simplex_qp_pass = _IMPL["simplex_qp"]
