r"""Smooth dyadic partition of unity on the half line.

``bump`` is a :math:`C^\infty` function equal to 1 on :math:`[0, 1]` and 0
on :math:`[2, \infty)`, and

.. math::

    \psi_j(r) = \mathrm{bump}(r/2^j) - \mathrm{bump}(r/2^{j-1})

is supported in :math:`[2^{j-1}, 2^{j+1}]` with :math:`\sum_j \psi_j = 1` on
:math:`(0, \infty)`.
"""

from __future__ import annotations

import numpy as np


def _flat(t: np.ndarray) -> np.ndarray:
    """:math:`e^{-1/t}` for ``t > 0`` and 0 otherwise."""
    pos = t > 0
    out = np.zeros_like(t)
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def bump(x: float | np.ndarray) -> float | np.ndarray:
    """Smooth monotone step: 1 for ``x <= 1``, 0 for ``x >= 2``."""
    t = np.asarray(x, dtype=float)
    a = _flat(np.atleast_1d(2.0 - t))
    b = _flat(np.atleast_1d(t - 1.0))
    out = a / (a + b)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(t.shape)


def _step_pair(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``bump(t)`` and ``1 - bump(t)``, each computed without cancellation."""
    a = _flat(2.0 - t)
    b = _flat(t - 1.0)
    total = a + b
    return a / total, b / total


def band_multiplier(j: int, r: float | np.ndarray) -> float | np.ndarray:
    """Annular cutoff :math:`\\psi_j(r)` supported in :math:`[2^{j-1}, 2^{j+1}]`.

    On the inner half :math:`\\psi_j(r) = 1 - \\mathrm{bump}(r/2^{j-1})` and on
    the outer half :math:`\\psi_j(r) = \\mathrm{bump}(r/2^j)`; both are evaluated
    in the complementary form so that the cutoff stays positive (no
    cancellation to zero) inside its support.
    """
    r = np.asarray(r, dtype=float)
    u = np.atleast_1d(r / 2.0**j)
    out = np.zeros_like(u)
    inner = (u > 0.5) & (u < 1.0)
    outer = (u >= 1.0) & (u < 2.0)
    out[inner] = _step_pair(2.0 * u[inner])[1]
    out[outer] = _step_pair(u[outer])[0]
    return float(out[0]) if np.ndim(r) == 0 else out.reshape(r.shape)
