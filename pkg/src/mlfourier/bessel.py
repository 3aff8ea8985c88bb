r"""Bessel functions :math:`J_\lambda` of real order :math:`\lambda \ge -1/2`.

Small and moderate arguments use the Poisson integral

.. math::

    J_\lambda(r) = \frac{(r/2)^\lambda}{\Gamma(\lambda + 1/2)\sqrt{\pi}}
        \int_{-1}^{1} e^{irs} (1 - s^2)^{\lambda - 1/2}\, ds,

integrated with Gauss-Jacobi (Gegenbauer) nodes so that the endpoint
weight is absorbed exactly. Large arguments use the Hankel expansion

.. math::

    J_\lambda(r) = \sum_{\ell=0}^{M} \sum_\pm c^\pm_\ell(\lambda)\, r^{-(\ell+1/2)} e^{\pm ir}
        + O(r^{-M-3/2}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import ConfigurationError
from .quadrature import gauss_gegenbauer, gauss_jacobi

CROSSOVER = 30.0
"""Arguments above this use the asymptotic expansion."""

REMAINDER_TARGET = 1e-13
_MAX_TERMS = 40


@dataclass(frozen=True)
class BesselOrder:
    """Order :math:`\\lambda`, optionally tied to a dimension via :math:`\\lambda = d/2 - 1`."""

    lam: float
    d: int | None = None

    def __post_init__(self) -> None:
        if self.lam < -0.5:
            raise ConfigurationError(f"Bessel order out of range: lambda = {self.lam} < -1/2")
        if self.d is not None:
            if self.d < 1:
                raise ConfigurationError(f"dimension must be positive: got {self.d}")
            if not math.isclose(self.lam, self.d / 2 - 1):
                raise ConfigurationError(
                    f"lambda = {self.lam} does not match d/2 - 1 for d = {self.d}"
                )

    @classmethod
    def from_dimension(cls, d: int) -> BesselOrder:
        return cls(d / 2 - 1, d)

    @property
    def half_integer(self) -> bool:
        return float(self.lam + 0.5).is_integer()


class AsymptoticExpansion(NamedTuple):
    M: int
    coefficients: tuple[tuple[complex, complex], ...]
    """Pairs :math:`(c^+_\\ell, c^-_\\ell)` for ``l = 0..M``."""


@lru_cache(maxsize=256)
def _hankel_amplitudes(lam: float, n: int) -> tuple[float, ...]:
    # a_l = prod_{m=1}^{l} (4 lam^2 - (2m-1)^2) / (8^l l!); this vanishes
    # identically beyond l = lam + 1/2 for half-integer orders
    mu = 4.0 * lam * lam
    out = [1.0]
    for ell in range(1, n + 1):
        out.append(out[-1] * (mu - (2 * ell - 1) ** 2) / (8.0 * ell))
    return tuple(out)


@lru_cache(maxsize=256)
def asymptotic_coefficients(order: BesselOrder, M: int) -> AsymptoticExpansion:
    """Coefficients :math:`c^\\pm_\\ell(\\lambda)` of the large-argument expansion."""
    if M < 0:
        raise ConfigurationError(f"truncation order must be non-negative: got {M}")
    amps = _hankel_amplitudes(order.lam, M)
    pairs = []
    for ell, a in enumerate(amps):
        phase = math.pi * ell / 2 - math.pi * order.lam / 2 - math.pi / 4
        c = a / math.sqrt(2 * math.pi)
        pairs.append((c * complex(math.cos(phase), math.sin(phase)),
                      c * complex(math.cos(phase), -math.sin(phase))))
    return AsymptoticExpansion(M, tuple(pairs))


def remainder_constant(order: BesselOrder, M: int) -> float:
    """Constant ``C`` in the envelope ``C r^{-M-3/2}`` (twice the first omitted amplitude)."""
    amps = _hankel_amplitudes(order.lam, M + 1)
    return 2.0 * abs(amps[M + 1]) / math.sqrt(2 * math.pi)


def bessel_asymptotic(order: BesselOrder, r: float, M: int) -> tuple[float, float]:
    """Truncated expansion and its remainder envelope.

    :returns: ``(sum, envelope)``; the sum is real because the two signs
        contribute complex conjugates.
    :raises ConfigurationError: if ``r <= 1``.
    """
    if M < 1:
        raise ConfigurationError(f"truncation order must be positive: got {M}")
    if not r > 1:
        raise ConfigurationError(f"asymptotic expansion requires r > 1: got {r}")
    expansion = asymptotic_coefficients(order, M)
    total = 0j
    eip = complex(math.cos(r), math.sin(r))
    for ell, (cp, cm) in enumerate(expansion.coefficients):
        total += (cp * eip + cm * eip.conjugate()) * r ** (-(ell + 0.5))
    if abs(total.imag) > 1e-13 * max(abs(total), 1e-300):
        raise ArithmeticError(f"conjugate symmetry lost: imaginary residue {total.imag:.3e}")
    return total.real, remainder_constant(order, M) * r ** (-M - 1.5)


def _asymptotic_array(order: BesselOrder, r: np.ndarray, M: int) -> np.ndarray:
    amps = _hankel_amplitudes(order.lam, M)
    phase0 = r - math.pi * order.lam / 2 - math.pi / 4
    total = np.zeros_like(r)
    for ell, a in enumerate(amps):
        if a == 0.0:
            break
        total += a * np.cos(phase0 + math.pi * ell / 2) * r ** (-(ell + 0.5))
    return total * (2.0 / math.sqrt(2 * math.pi))


def _choose_truncation(order: BesselOrder, r: float) -> int | None:
    amps = _hankel_amplitudes(order.lam, _MAX_TERMS + 1)
    scale = 2.0 / math.sqrt(2 * math.pi)
    for M in range(1, _MAX_TERMS + 1):
        if scale * abs(amps[M + 1]) * r ** (-M - 1.5) < REMAINDER_TARGET:
            return M
    return None


def _poisson(order: BesselOrder, r: np.ndarray) -> np.ndarray:
    lam = order.lam
    n = 48 + int(np.max(r, initial=0.0))
    if abs(lam) < 1e-6:
        # the general Jacobi routine misplaces its nodes for orders this close to zero
        x, w = gauss_gegenbauer(n, lam)
    else:
        x, w = gauss_jacobi(n, lam - 0.5, lam - 0.5)
    out = np.empty_like(r)
    chunk = max(1, 1_000_000 // n)
    for i in range(0, r.size, chunk):
        rr = r[i:i + chunk]
        out[i:i + chunk] = np.cos(rr[:, None] * x) @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = (0.5 * r) ** lam / (gamma_fn(lam + 0.5) * math.sqrt(math.pi))
    return pref * out


def bessel_j(order: BesselOrder, r: float | np.ndarray) -> float | np.ndarray:
    """Evaluate :math:`J_\\lambda(r)` for ``r >= 0`` to about ``1e-12`` absolute.

    The order :math:`\\lambda = -1/2` (dimension one) uses the closed form
    :math:`\\sqrt{2/(\\pi r)}\\cos r`, which is the limit of the Poisson
    integral.
    """
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ConfigurationError("bessel_j requires r >= 0")

    if order.lam == -0.5:
        with np.errstate(divide="ignore"):
            out = np.sqrt(2.0 / (math.pi * r)) * np.cos(r)
    else:
        out = np.empty_like(r)
        near = r <= CROSSOVER
        far = ~near
        if np.any(far):
            M = _choose_truncation(order, CROSSOVER)
            if M is None:
                near = np.ones_like(near)
                far = ~near
            else:
                out[far] = _asymptotic_array(order, r[far], M)
        if np.any(near):
            out[near] = _poisson(order, r[near])
        if order.lam == 0:
            out[r == 0] = 1.0
        elif order.lam > 0:
            out[r == 0] = 0.0
    return float(out[0]) if scalar else out


def bessel_small_argument(order: BesselOrder, r: float | np.ndarray) -> float | np.ndarray:
    """Leading term :math:`(r/2)^\\lambda/\\Gamma(\\lambda+1)` of :math:`J_\\lambda` near zero.

    With :math:`\\lambda = d/2 - 1` this is
    :math:`2^{1-d/2} r^{d/2-1}/\\Gamma(d/2)`.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ConfigurationError("small-argument form requires 0 <= r <= 1")
    with np.errstate(divide="ignore"):
        out = (0.5 * arr) ** order.lam / math.gamma(order.lam + 1)
    return float(out) if np.ndim(r) == 0 else out
