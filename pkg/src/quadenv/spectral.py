"""Spectral lift: apply a sign/permutation invariant penalty to singular values."""

from dataclasses import dataclass

import numpy as np


def _as_matrix(x, shape=None):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("spectral penalty expects a 2D array")
    if shape is not None and x.shape != tuple(shape):
        raise ValueError(f"expected shape {tuple(shape)}, got {x.shape}")
    return x


@dataclass(frozen=True)
class SpectralPenalty:
    """base penalty evaluated at the singular value vector of a matrix.

    The base must be invariant to signs and permutations (card, top-k, l1,
    zero and squared-norm all qualify); its prox must preserve the descending
    order of nonnegative inputs, which lets the matrix prox act on the SVD.
    Singular values at the numerical noise floor are treated as exact zeros,
    so counting bases see the numerical rank rather than SVD roundoff.
    """

    base: object
    shape: tuple

    def __post_init__(self):
        if not getattr(self.base, "sign_permutation_invariant", False):
            raise ValueError("spectral base must be sign and permutation invariant")
        m, n = self.shape
        if m < 1 or n < 1:
            raise ValueError("shape must be a pair of positive integers")
        object.__setattr__(self, "shape", (int(m), int(n)))

    def value(self, x):
        x = _as_matrix(x, self.shape)
        s = np.linalg.svd(x, compute_uv=False)
        if s.size and s[0] > 0.0:
            s[s <= max(self.shape) * np.finfo(float).eps * s[0]] = 0.0
        return self.base.value(s)

    def prox(self, v, t):
        v = _as_matrix(v, self.shape)
        u, s, vt = np.linalg.svd(v, full_matrices=False)
        ps = self.base.prox(s, t)
        return (u * ps) @ vt

    def envelope_value(self, x, gamma):
        x = _as_matrix(x, self.shape)
        return self.base.envelope_value(np.linalg.svd(x, compute_uv=False), gamma)

    def descriptor(self):
        return {"type": "spectral", "base": self.base.descriptor(),
                "shape": list(self.shape)}


def spectral_eval(x, penalty):
    return penalty.value(x)


def spectral_prox(v, t, penalty):
    return penalty.prox(v, t)


def q_spectral_eval(x, gamma, penalty):
    """Envelope of the lifted penalty: the vector envelope at the singular values."""
    return penalty.envelope_value(x, gamma)
