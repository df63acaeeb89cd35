"""Separable sparsity penalties, their proximal operators and quadratic envelopes.

A penalty object exposes value(x) -> float, prox(v, t) -> ndarray and
descriptor() -> dict. Penalties with closed-form envelopes additionally expose
envelope_value(x, gamma) and, where a closed-form prox of the envelope exists,
envelope_prox(v, t, gamma). Proxes are exact global minimizers of
f(z) + ||z - v||^2 / (2t), computed coordinatewise where the penalty is
separable.
"""

from dataclasses import dataclass

import numpy as np


def _as_vector(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    return x


def card_prox(v, t, mu):
    """Hard threshold at sqrt(2*mu*t). Ties (|v| exactly at threshold) go to 0."""
    if t <= 0:
        raise ValueError("prox step t must be positive")
    v = _as_vector(v)
    thr = np.sqrt(2.0 * mu * t)
    return np.where(np.abs(v) > thr, v, 0.0)


def l1_prox(v, t, lam=1.0):
    """Soft threshold at lam*t."""
    if t <= 0:
        raise ValueError("prox step t must be positive")
    v = _as_vector(v)
    return np.sign(v) * np.maximum(np.abs(v) - lam * t, 0.0)


def topk_prox(v, t, k):
    """Euclidean projection onto the k-sparse set: keep the k largest magnitudes.

    Magnitude ties are broken toward the lowest index. Independent of t.
    """
    if t <= 0:
        raise ValueError("prox step t must be positive")
    v = _as_vector(v)
    if k >= v.size:
        return v.copy()
    out = np.zeros_like(v)
    if k == 0:
        return out
    order = np.argsort(-np.abs(v), kind="stable")
    keep = order[:k]
    out[keep] = v[keep]
    return out


def _q_card_scalar(a, gamma, mu):
    # a = |z| >= 0; branch sqrt(2*gamma*mu)*a - gamma*a^2/2 up to sqrt(2*mu/gamma), then mu
    t_edge = np.sqrt(2.0 * mu / gamma)
    c = np.sqrt(2.0 * gamma * mu)
    return np.where(a < t_edge, c * a - 0.5 * gamma * a * a, mu)


def q_card_eval(x, gamma, mu):
    """Quadratic envelope of mu*card, summed over coordinates.

    Per coordinate: sqrt(2*gamma*mu)|z| - (gamma/2) z^2 for |z| <= sqrt(2*mu/gamma),
    and mu beyond.
    """
    _check_gamma(gamma)
    if mu <= 0:
        raise ValueError("mu must be positive")
    x = _as_vector(x)
    return float(np.sum(_q_card_scalar(np.abs(x), gamma, mu)))


def q_card_prox(v, t, gamma, mu):
    """Exact prox of the card envelope, valid for t*gamma < 1.

    Coordinatewise candidates: 0; v itself when |v| >= sqrt(2*mu/gamma); the
    interior stationary point (|v| - t*sqrt(2*gamma*mu)) / (1 - t*gamma) when it
    lands in (0, sqrt(2*mu/gamma)]. Ties go to the smallest magnitude.
    """
    _check_gamma(gamma)
    if mu <= 0:
        raise ValueError("mu must be positive")
    if t <= 0:
        raise ValueError("prox step t must be positive")
    if t * gamma >= 1.0:
        raise ValueError(
            "q_card_prox requires t*gamma < 1; for step 1/gamma use the "
            "hull prox mode of the solver (penalty prox at t = 1/gamma)"
        )
    v = _as_vector(v)
    a = np.abs(v)
    sgn = np.sign(v)
    t_edge = np.sqrt(2.0 * mu / gamma)
    c = np.sqrt(2.0 * gamma * mu)

    def objective(z):
        return _q_card_scalar(z, gamma, mu) + (z - a) ** 2 / (2.0 * t)

    best_z = np.zeros_like(a)
    best_obj = objective(best_z)

    z_int = (a - t * c) / (1.0 - t * gamma)
    ok = (z_int > 0.0) & (z_int <= t_edge)
    z_int = np.where(ok, z_int, 0.0)
    obj_int = np.where(ok, objective(z_int), np.inf)
    better = obj_int < best_obj
    best_z = np.where(better, z_int, best_z)
    best_obj = np.where(better, obj_int, best_obj)

    ok = a >= t_edge
    obj_flat = np.where(ok, mu, np.inf)
    better = obj_flat < best_obj
    best_z = np.where(better & ok, a, best_z)

    return sgn * best_z


def q_topk_eval(x, gamma, k):
    """Quadratic envelope of the k-sparse indicator.

    With a = sorted magnitudes (descending), solves the monotone threshold
    equation sum_{i<=k} max(s - a_i, 0) = sum_{i>k} a_i by breakpoint scan and
    returns (gamma/2) * [sum_{i>k}(2 a_i s - a_i^2) - sum_{i<=k} max(s - a_i, 0)^2].
    Zero exactly on k-sparse inputs. For k = 0 this is the indicator of the
    origin: 0 at x = 0, +inf elsewhere.
    """
    _check_gamma(gamma)
    if k < 0:
        raise ValueError("k must be nonnegative")
    x = _as_vector(x)
    n = x.size
    if k >= n:
        return 0.0
    a = np.sort(np.abs(x))[::-1]
    tail = a[k:]
    rhs = float(np.sum(tail))
    if rhs == 0.0:
        return 0.0
    if k == 0:
        return float(np.inf)
    head_asc = a[:k][::-1]
    prefix = np.cumsum(head_asc)
    s = (rhs + prefix[-1]) / k
    for m in range(1, k + 1):
        cand = (rhs + prefix[m - 1]) / m
        lo = head_asc[m - 1]
        hi = head_asc[m] if m < k else np.inf
        if lo <= cand <= hi:
            s = cand
            break
    h = np.sum(2.0 * tail * s - tail * tail) - np.sum(np.maximum(s - a[:k], 0.0) ** 2)
    return float(max(0.5 * gamma * h, 0.0))


def _check_gamma(gamma):
    if not np.isfinite(gamma) or gamma <= 0:
        raise ValueError("gamma must be a positive finite real")


@dataclass(frozen=True)
class CardPenalty:
    """mu times the number of nonzero entries."""

    mu: float
    sign_permutation_invariant = True

    def __post_init__(self):
        if self.mu <= 0 or not np.isfinite(self.mu):
            raise ValueError("mu must be positive")

    def value(self, x):
        return float(self.mu * np.count_nonzero(_as_vector(x)))

    def prox(self, v, t):
        return card_prox(v, t, self.mu)

    def envelope_value(self, x, gamma):
        return q_card_eval(x, gamma, self.mu)

    def envelope_prox(self, v, t, gamma):
        return q_card_prox(v, t, gamma, self.mu)

    def descriptor(self):
        return {"type": "card", "mu": self.mu}


@dataclass(frozen=True)
class TopKIndicator:
    """Indicator of the set of vectors with at most k nonzeros."""

    k: int
    sign_permutation_invariant = True

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ValueError("k must be a nonnegative integer")
        object.__setattr__(self, "k", int(self.k))

    def value(self, x):
        x = _as_vector(x)
        return 0.0 if np.count_nonzero(x) <= self.k else float(np.inf)

    def prox(self, v, t):
        return topk_prox(v, t, self.k)

    def envelope_value(self, x, gamma):
        return q_topk_eval(x, gamma, self.k)

    def descriptor(self):
        return {"type": "topk", "k": self.k}


@dataclass(frozen=True)
class L1Penalty:
    """lam times the l1 norm. Convex, so it equals its own envelope."""

    lam: float
    sign_permutation_invariant = True

    def __post_init__(self):
        if self.lam <= 0 or not np.isfinite(self.lam):
            raise ValueError("lambda must be positive")

    def value(self, x):
        return float(self.lam * np.sum(np.abs(_as_vector(x))))

    def prox(self, v, t):
        return l1_prox(v, t, self.lam)

    def envelope_value(self, x, gamma):
        return self.value(x)

    def envelope_prox(self, v, t, gamma):
        return self.prox(v, t)

    def descriptor(self):
        return {"type": "l1", "lambda": self.lam}


@dataclass(frozen=True)
class ZeroPenalty:
    """The zero function; prox is the identity."""

    sign_permutation_invariant = True

    def value(self, x):
        return 0.0

    def prox(self, v, t):
        if t <= 0:
            raise ValueError("prox step t must be positive")
        return _as_vector(v).copy()

    def envelope_value(self, x, gamma):
        return 0.0

    def envelope_prox(self, v, t, gamma):
        return self.prox(v, t)

    def descriptor(self):
        return {"type": "zero"}


@dataclass(frozen=True)
class SquaredNormPenalty:
    """(weight/2) ||x||^2. Convex, equals its own envelope."""

    weight: float
    sign_permutation_invariant = True

    def __post_init__(self):
        if self.weight <= 0 or not np.isfinite(self.weight):
            raise ValueError("weight must be positive")

    def value(self, x):
        x = _as_vector(x)
        return float(0.5 * self.weight * np.dot(x, x))

    def prox(self, v, t):
        if t <= 0:
            raise ValueError("prox step t must be positive")
        return _as_vector(v) / (1.0 + t * self.weight)

    def envelope_value(self, x, gamma):
        return self.value(x)

    def envelope_prox(self, v, t, gamma):
        return self.prox(v, t)

    def descriptor(self):
        return {"type": "sqnorm", "weight": self.weight}


def penalty_from_json(obj):
    """Build a penalty from its JSON descriptor, e.g. {"type": "card", "mu": 1.0}."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError("penalty descriptor must be an object with a 'type' key")
    kind = obj["type"]
    if kind == "card":
        return CardPenalty(float(obj["mu"]))
    if kind == "topk":
        return TopKIndicator(int(obj["k"]))
    if kind == "l1":
        return L1Penalty(float(obj["lambda"]))
    if kind == "zero":
        return ZeroPenalty()
    if kind == "sqnorm":
        return SquaredNormPenalty(float(obj["weight"]))
    raise ValueError(f"unknown penalty type: {kind!r}")


def penalty_to_json(penalty):
    return penalty.descriptor()
