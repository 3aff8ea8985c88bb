"""Quadrature rules and sequence acceleration used across the package."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh_tridiagonal
from scipy.special import beta as beta_fn
from scipy.special import roots_jacobi


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def gauss_jacobi(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the weight (1 - x)^a (1 + x)^b on [-1, 1]."""
    x, w = roots_jacobi(n, a, b)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def gauss_gegenbauer(n: int, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the weight :math:`(1 - x^2)^{\\lambda - 1/2}`, ``lam > -1/2``.

    Built by Golub-Welsch from the symmetric three-term recurrence. The first
    off-diagonal entry is written in closed form, so orders close to zero
    (where the general Jacobi routine loses accuracy in its nodes) are exact
    to roundoff.
    """
    k = np.arange(2, n, dtype=float)
    off = np.empty(n - 1)
    off[0] = 1.0 / (2.0 * (1.0 + lam))
    off[1:] = k * (k + 2 * lam - 1) / (4.0 * (k + lam) * (k + lam - 1))
    x, v = eigh_tridiagonal(np.zeros(n), np.sqrt(off))
    w = beta_fn(0.5, lam + 0.5) * v[0] ** 2
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gauss_legendre(
    edges: np.ndarray, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Map an ``n``-point rule onto every panel ``[edges[i], edges[i + 1]]``."""
    x, w = gauss_legendre(n)
    edges = np.asarray(edges, dtype=float)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def aitken(seq: np.ndarray) -> np.ndarray:
    """One sweep of Aitken's delta-squared process.

    Entries whose second difference vanishes (to roundoff) are passed through
    unchanged instead of dividing by zero; that happens when the sequence has
    already converged.
    """
    s = np.asarray(seq)
    if s.size < 3:
        return s[-1:].copy()
    d1 = s[1:-1] - s[:-2]
    d2 = s[2:] - 2.0 * s[1:-1] + s[:-2]
    scale = np.maximum(np.abs(s[2:]), np.abs(s[1:-1]))
    out = s[2:].astype(complex if np.iscomplexobj(s) else float, copy=True)
    ok = np.abs(d2) > 1e3 * np.finfo(float).eps * np.maximum(scale, np.abs(d1))
    out[ok] = s[:-2][ok] - d1[ok] ** 2 / d2[ok]
    return out


def iterated_aitken(seq: np.ndarray) -> complex:
    """Apply Aitken's process repeatedly and return the deepest iterate."""
    s = np.asarray(seq)
    while s.size >= 3:
        s = aitken(s)
    return s[-1]
