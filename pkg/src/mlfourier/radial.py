r"""Fourier transforms of radial functions on :math:`\mathbb{R}^d`.

With the convention :math:`\hat\varphi(\xi) = \int \varphi(x) e^{-2\pi i x\cdot\xi} dx`
a radial :math:`\varphi(x) = \varphi_0(|x|)` has the radial transform

.. math::

    \hat\varphi(\xi) = 2\pi|\xi|^{1-d/2} \int_0^\infty
        \varphi_0(r) J_{d/2-1}(2\pi|\xi| r)\, r^{d/2}\, dr .

The half line is split with the smooth dyadic partition
:math:`\sum_j \psi_j(r) = 1`, :math:`\operatorname{supp}\psi_j = [2^{j-1}, 2^{j+1}]`
(see :mod:`mlfourier.littlewood_paley`). Each block is a compactly supported
smooth integral done by Gauss-Legendre quadrature; the partial sums over
blocks are smoothly truncated integrals, so they converge even when the
integral is only conditionally convergent, and iterated Aitken extrapolation
is applied to them in that case.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import rgamma

from .bessel import BesselOrder, bessel_j
from .errors import ConfigurationError, GridCoverageError, OscillatorySummationFailed
from .io import read_complex_csv, write_complex_csv
from .partition import band_multiplier
from .mlf import MLParams, RaySpec, ray_kernel
from .quadrature import gauss_legendre, iterated_aitken

BLOCK_BUDGET = 80
"""Maximum number of outward blocks before oscillatory summation gives up."""

MIN_NODES = 64
NODES_PER_PERIOD = 10

_EPS = np.finfo(float).eps


# {{{ types


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Radial profile :math:`\\varphi_0` of a function on :math:`\\mathbb{R}^d`.

    ``decay_exponent_hint`` is the exponent ``a`` in :math:`|\\varphi_0(r)| \\lesssim r^{-a}`;
    it decides whether the transform integral converges absolutely.
    ``breakpoints`` lists radii where :math:`\\varphi_0` is not smooth.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    decay_exponent_hint: float
    breakpoints: tuple[float, ...] = ()
    name: str = ""
    absolute_noise: float = 0.0
    """Absolute accuracy of ``evaluator``; sets a floor for convergence tests."""

    def absolutely_integrable(self, d: int) -> bool:
        # the Bessel factor contributes r^{-1/2}, the measure r^{d/2}
        return self.decay_exponent_hint > (d + 1) / 2

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(r, dtype=float)), dtype=complex)


@dataclass(frozen=True)
class RadialSamples:
    """Samples of a radial function at the radii ``xi_grid``."""

    xi_grid: np.ndarray
    values: np.ndarray
    d: int

    def __post_init__(self) -> None:
        xi = np.array(self.xi_grid, dtype=float)
        values = np.array(self.values, dtype=complex)
        if xi.ndim != 1 or xi.shape != values.shape:
            raise ConfigurationError("xi_grid and values must be 1-D arrays of equal length")
        if xi.size and (xi[0] <= 0 or np.any(np.diff(xi) <= 0)):
            raise ConfigurationError("xi_grid must be positive and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("sample values must be finite")
        if self.d < 1:
            raise ConfigurationError(f"dimension must be positive: got {self.d}")
        xi.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "xi_grid", xi)
        object.__setattr__(self, "values", values)

    def to_csv(self, path: str | Path) -> None:
        write_complex_csv(path, ["xi"], self.xi_grid[:, None], self.values)

    @classmethod
    def from_csv(cls, path: str | Path, d: int) -> RadialSamples:
        cols, values = read_complex_csv(path, ["xi"])
        return cls(cols[:, 0], values, d)


@dataclass(frozen=True)
class ExponentRange:
    """Exponents ``p`` with ``lower < p < upper`` (``<=`` if ``upper_inclusive``)."""

    gamma: float
    d: int
    lower: float = 1.0
    upper: float = math.inf
    upper_inclusive: bool = False

    def __contains__(self, p: float) -> bool:
        if not p > self.lower:
            return False
        return p <= self.upper if self.upper_inclusive else p < self.upper


def admissible_exponents(gamma: float, d: int) -> ExponentRange:
    """Exponents ``p`` with ``p > 1`` and ``gamma p' > d``."""
    if not gamma > 0:
        raise ConfigurationError(f"gamma must be positive: got {gamma}")
    if gamma > d:
        return ExponentRange(gamma, d, upper=math.inf, upper_inclusive=True)
    if gamma == d:
        return ExponentRange(gamma, d, upper=math.inf, upper_inclusive=False)
    return ExponentRange(gamma, d, upper=d / (d - gamma), upper_inclusive=False)


# }}}


# {{{ block quadrature


def _panel_count(xi: float, length: float) -> int:
    """Panels per half block so that every panel spans at most
    ``MIN_NODES / NODES_PER_PERIOD`` oscillation periods (rounded up to a
    power of two so that rules are shared between nearby ``xi``)."""
    periods = xi * length
    m = max(1, int(math.ceil(NODES_PER_PERIOD * periods / MIN_NODES)))
    return 1 << (m - 1).bit_length()


@lru_cache(maxsize=2048)
def _block_geometry(
    breakpoints: tuple[float, ...], d: int, j: int, m: int
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``r`` and weights ``psi_j(r) r^{d/2} dr`` on block ``j``.

    Both halves ``[2^{j-1}, 2^j]`` and ``[2^j, 2^{j+1}]`` are cut into ``m``
    and ``2m`` equal panels (equal panel length), and each piece between
    consecutive breakpoints of the profile carries ``MIN_NODES``
    Gauss-Legendre points.
    """
    lo, mid, hi = 2.0 ** (j - 1), 2.0**j, 2.0 ** (j + 1)
    edges = np.concatenate([np.linspace(lo, mid, m + 1), np.linspace(mid, hi, 2 * m + 1)[1:]])
    inner = [b for b in breakpoints if lo < b < hi]
    if inner:
        edges = np.unique(np.concatenate([edges, inner]))
    x, w = gauss_legendre(MIN_NODES)
    a, b = edges[:-1, None], edges[1:, None]
    r = (0.5 * (a + b) + 0.5 * (b - a) * x).ravel()
    weights = (0.5 * (b - a) * w).ravel() * band_multiplier(j, r) * r ** (d / 2)
    r.setflags(write=False)
    weights.setflags(write=False)
    return r, weights


@lru_cache(maxsize=2048)
def _block_rule(
    profile: RadialProfile, d: int, j: int, m: int
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``r`` and weights ``psi_j(r) phi_0(r) r^{d/2} dr`` on block ``j``."""
    r, geometric = _block_geometry(profile.breakpoints, d, j, m)
    weights = geometric * profile(r)
    weights.setflags(write=False)
    return r, weights


def _radial_factor(d: int, xi: float, r: np.ndarray) -> np.ndarray:
    """:math:`2\\pi\\xi^{1-d/2} J_{d/2-1}(2\\pi\\xi r)`."""
    if d == 1:
        # J_{-1/2}(x) = sqrt(2/(pi x)) cos x, combined with r^{1/2} of the weight
        return 2.0 * np.cos(2 * math.pi * xi * r) / np.sqrt(r)
    order = BesselOrder.from_dimension(d)
    return 2 * math.pi * xi ** (1 - d / 2) * bessel_j(order, 2 * math.pi * xi * r)


class BlockValue(NamedTuple):
    value: complex
    magnitude: float
    """Sum of absolute values of the quadrature terms (sets the roundoff floor)."""


def block_integral(profile: RadialProfile, d: int, j: int, xi: float) -> BlockValue:
    """Contribution of the dyadic block ``j`` to :math:`\\hat\\varphi(\\xi)`."""
    m = _panel_count(xi, 2.0 ** (j - 1))
    r, w = _block_rule(profile, d, j, m)
    terms = w * _radial_factor(d, xi, r)
    return BlockValue(complex(np.sum(terms)), float(np.sum(np.abs(terms))))


# }}}


# {{{ transform


class TransformResult(NamedTuple):
    value: complex
    blocks: tuple[int, int]
    """Lowest and highest block index that was summed."""
    error_estimate: float


def radial_fourier_detailed(
    profile: RadialProfile,
    d: int,
    xi: float,
    *,
    oscillatory: bool | None = None,
    rtol: float = 1e-8,
    block_budget: int = BLOCK_BUDGET,
) -> TransformResult:
    """Radial Fourier transform with convergence diagnostics.

    :arg oscillatory: enable sequence acceleration of the outward block sums.
        ``None`` enables it exactly when the integral is not absolutely
        convergent according to ``profile.decay_exponent_hint``.
    """
    if not xi > 0:
        raise ConfigurationError(f"the radial transform is evaluated at xi > 0: got {xi}")
    if d < 1:
        raise ConfigurationError(f"dimension must be positive: got {d}")
    absolute = profile.absolutely_integrable(d)
    if oscillatory is None:
        oscillatory = not absolute
    if not absolute and not oscillatory:
        raise ConfigurationError(
            "integral is not absolutely convergent; enable oscillatory summation"
        )

    j0 = math.floor(math.log2(1.0 / xi))

    # inward blocks shrink geometrically (the integrand is bounded by r^{d-1})
    head = 0j
    magnitude = 0.0
    quiet = 0
    j = j0
    while True:
        b = block_integral(profile, d, j, xi)
        head += b.value
        magnitude += b.magnitude
        if b.magnitude <= 1e-18 * max(magnitude, 1e-300):
            quiet += 1
            if quiet == 2:
                break
        else:
            quiet = 0
        j -= 1
        if j < j0 - 400:
            break
    j_low = j

    partial = [head]
    accelerated: list[complex] = []
    for k in range(1, block_budget + 1):
        b = block_integral(profile, d, j0 + k, xi)
        magnitude += b.magnitude
        partial.append(partial[-1] + b.value)
        estimate = iterated_aitken(np.array(partial)) if oscillatory else partial[-1]
        accelerated.append(estimate)
        if len(accelerated) >= 3:
            floor = 1e3 * _EPS * magnitude
            tol = max(rtol * abs(estimate), floor)
            d1 = abs(accelerated[-1] - accelerated[-2])
            d2 = abs(accelerated[-2] - accelerated[-3])
            if d1 <= tol and d2 <= tol:
                return TransformResult(complex(estimate), (j_low, j0 + k), max(d1, floor))
    raise OscillatorySummationFailed(
        "oscillatory summation failed",
        xi=xi,
        d=d,
        blocks=block_budget,
        last_iterates=accelerated[-3:],
    )


def radial_fourier(profile: RadialProfile, d: int, xi: float, **kwargs: object) -> complex:
    """Value of the radial Fourier transform at :math:`|\\xi| = \\xi > 0`."""
    return radial_fourier_detailed(profile, d, xi, **kwargs).value  # type: ignore[arg-type]


@lru_cache(maxsize=64)
def kernel_profile(params: MLParams, ray: RaySpec) -> RadialProfile:
    """Profile :math:`r \\mapsto E_{\\alpha,\\beta}(e^{i\\pi s} r^\\gamma)` of the kernel."""
    kernel = ray_kernel(params, ray)
    # |E(z)| ~ |z|^{-1}/|Gamma(beta - alpha)|, one order faster when that vanishes
    leading = float(rgamma(params.beta - params.alpha))
    decay = ray.gamma if abs(leading) > 1e-14 else 2 * ray.gamma
    # the contour rule is accurate to a few ulps of the kernel's overall scale
    scale = float(np.max(np.abs(kernel.at_modulus(np.array([0.0, 0.5, 1.0])))))
    return RadialProfile(
        kernel,
        decay,
        absolute_noise=1e-14 * scale,
        name=f"E[{params.alpha:g},{params.beta:g}](exp(i pi {ray.s:g}) r^{ray.gamma:g})",
    )


def mlf_kernel_hat(
    params: MLParams, ray: RaySpec, d: int, xi: float, **kwargs: object
) -> complex:
    """Fourier transform of :math:`x \\mapsto E_{\\alpha,\\beta}(e^{i\\pi s}|x|^\\gamma)` at ``xi``."""
    ray.require_decay(params.alpha)
    return radial_fourier(kernel_profile(params, ray), d, xi, oscillatory=True, **kwargs)


# }}}


# {{{ grids, slopes and norms


def default_xi_grid(
    lo_octave: int = -14, hi_octave: int = 10, per_octave: int = 8
) -> np.ndarray:
    """Log-spaced grid :math:`2^{k/m}` from ``2**lo_octave`` to ``2**hi_octave``."""
    k = np.arange(lo_octave * per_octave, hi_octave * per_octave + 1)
    return 2.0 ** (k / per_octave)


def sample_transform(
    profile: RadialProfile, d: int, xi_grid: np.ndarray, **kwargs: object
) -> RadialSamples:
    values = [radial_fourier(profile, d, float(x), **kwargs) for x in xi_grid]
    return RadialSamples(np.asarray(xi_grid), np.array(values), d)


def sample_kernel_hat(
    params: MLParams, ray: RaySpec, d: int, xi_grid: np.ndarray | None = None
) -> RadialSamples:
    ray.require_decay(params.alpha)
    if xi_grid is None:
        xi_grid = default_xi_grid()
    return sample_transform(kernel_profile(params, ray), d, xi_grid, oscillatory=True)


def default_windows(
    xi_grid: np.ndarray, low_octaves: float = 5, high_octaves: float = 4
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Slope windows covering the lowest and highest octaves of a grid."""
    lo, hi = float(xi_grid[0]), float(xi_grid[-1])
    return (lo, lo * 2.0**low_octaves), (hi * 2.0**-high_octaves, hi)


def asymptotic_slope(samples: RadialSamples, window: tuple[float, float]) -> float:
    """Least-squares slope of :math:`\\log|v|` against :math:`\\log\\xi` inside ``window``.

    Exact zeros (underflow) are dropped before fitting.
    """
    lo, hi = window
    xi = samples.xi_grid
    mag = np.abs(samples.values)
    mask = (xi >= lo * (1 - 1e-12)) & (xi <= hi * (1 + 1e-12)) & (mag > 0)
    if np.count_nonzero(mask) < 6:
        raise ConfigurationError(
            f"need at least 6 nonzero samples in [{lo:g}, {hi:g}]: got {np.count_nonzero(mask)}"
        )
    slope, _ = np.polyfit(np.log(xi[mask]), np.log(mag[mask]), 1)
    return float(slope)


def sphere_area(d: int) -> float:
    """Surface measure :math:`2\\pi^{d/2}/\\Gamma(d/2)` of the unit sphere in :math:`\\mathbb{R}^d`."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    head: float = 0.0
    """Extrapolated share of the integral below the grid (before the ``1/p`` root)."""
    tail: float = 0.0
    """Extrapolated share of the integral above the grid."""
    details: dict = field(default_factory=dict)


def _end_contribution(t: np.ndarray, g: np.ndarray, noise: float) -> tuple[float, float]:
    """Extrapolate :math:`\\int g\\,dt` beyond one end of a log grid.

    ``t`` is :math:`\\log\\xi` and ``g`` the integrand in those coordinates,
    both ordered from the grid end inwards. Returns ``(contribution, rate)``
    with the fitted exponential rate (positive means decaying outwards). An
    end that does not decay is divergent, unless its integrand is already
    below ``noise``, in which case the samples have reached the roundoff
    floor of the data and the end is dropped.
    """
    if g[0] == 0:
        return 0.0, math.inf
    good = g > 0
    if np.count_nonzero(good) < 4:
        return 0.0, math.inf
    slope = float(np.polyfit(np.abs(t[good] - t[0]), np.log(g[good]), 1)[0])
    # g(t) ~ g0 exp(slope * distance_inwards): outward decay rate = slope
    if slope <= 0:
        return (0.0 if np.max(g) <= noise else math.inf), slope
    return float(g[0] / slope), slope


def lp_norm_estimate(
    samples: RadialSamples,
    p: float,
    *,
    coverage_tol: float = 1e-6,
    check_coverage: bool = True,
    fit_points: int = 8,
) -> NormEstimate:
    """:math:`L^p(\\mathbb{R}^d)` norm of sampled radial data.

    The integrand :math:`|v|^p\\xi^{d}` is integrated by the trapezoidal rule
    in :math:`\\log\\xi`. The parts of the half line outside the grid are
    estimated from the local exponential rate fitted to ``fit_points``
    samples at each end and added to the result.

    :raises GridCoverageError: when an end's estimated contribution exceeds
        ``coverage_tol`` relative to the total (or diverges), naming the end.
    """
    if not (p >= 1):
        raise ConfigurationError(f"p must satisfy 1 <= p <= inf: got {p}")
    mag = np.abs(samples.values)
    if math.isinf(p):
        return NormEstimate(float(np.max(mag)))
    xi, d = samples.xi_grid, samples.d
    t = np.log(xi)
    g = mag**p * xi**d
    body = float(np.trapezoid(g, t)) if hasattr(np, "trapezoid") else float(np.trapz(g, t))
    scale = max(body, 1e-300)
    noise = 1e-3 * coverage_tol * scale
    head, head_rate = _end_contribution(t[:fit_points], g[:fit_points], noise)
    tail, tail_rate = _end_contribution(t[::-1][:fit_points], g[::-1][:fit_points], noise)
    details = {"head_rate": head_rate, "tail_rate": tail_rate, "body": body}
    if check_coverage:
        for end, extra in (("underflow", head), ("overflow", tail)):
            if not extra <= coverage_tol * scale:
                which = "head (small xi)" if end == "underflow" else "tail (large xi)"
                raise GridCoverageError(
                    end,
                    f"{which} contributes {extra / scale:.3e} of the integral",
                    **details,
                )
    if math.isinf(head):
        head = 0.0
    if math.isinf(tail):
        tail = 0.0
    total = sphere_area(d) * (body + head + tail)
    return NormEstimate(total ** (1 / p), head / scale, tail / scale, details)


def lp_norm_radial(samples: RadialSamples, p: float, **kwargs: object) -> float:
    """Value of :func:`lp_norm_estimate`."""
    return lp_norm_estimate(samples, p, **kwargs).value  # type: ignore[arg-type]


# }}}
