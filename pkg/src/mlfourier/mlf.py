r"""Mittag-Leffler function :math:`E_{\alpha,\beta}` on complex rays.

Two evaluation routes are provided and cross-checked against each other:

* the power series :math:`\sum_k z^k / \Gamma(\alpha k + \beta)`, summed in
  double precision when its terms stay small and with guard digits (via
  :mod:`mpmath`) when the alternating terms would cancel catastrophically;
* the Dzhrbashyan contour integral

  .. math::

      E_{\alpha,\beta}(z) = \frac{1}{2\pi i\alpha}\int_{C_{\rho,\omega}}
          \frac{e^{\zeta^{1/\alpha}}\zeta^{(1-\beta)/\alpha}}{\zeta - z}\,d\zeta,
      \qquad |\arg z| > \omega,

  discretised with composite Gauss-Legendre panels (uniform on the arc,
  geometrically graded on the two rays).

Rays are parametrised as :math:`z = e^{i\pi s} r^\gamma`. The contour route is
only available when :math:`|s| > \alpha/2`, which is also the regime where
:math:`|E_{\alpha,\beta}(z)| \lesssim 1/(1+|z|)`.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import mpmath
import numpy as np
from scipy.special import gammaln, rgamma

from .errors import (
    ConfigurationError,
    ContourUnavailable,
    NonDecaySectorError,
    QuadratureStagnation,
    SeriesBudgetExceeded,
)
from .quadrature import gauss_legendre

logger = logging.getLogger(__name__)

SERIES_RADIUS = 4.0
"""Default switch-over modulus between the series and the contour integral."""

OVERLAP_TOLERANCE = 1e-9
"""Largest accepted series/contour disagreement inside the overlap band."""

_TAIL_LOG = math.log(1e-16)
_EPS = np.finfo(float).eps


# {{{ parameter types


@dataclass(frozen=True)
class MLParams:
    """Order ``alpha`` and type ``beta`` of :math:`E_{\\alpha,\\beta}`."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 2.0:
            raise ConfigurationError(f"alpha must lie in (0, 2): got {self.alpha}")
        if not self.beta > 0.0:
            raise ConfigurationError(f"beta must be positive: got {self.beta}")


@dataclass(frozen=True)
class RaySpec:
    """Ray :math:`z = e^{i\\pi s} r^\\gamma` in the complex plane."""

    s: float
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not -1.0 < self.s <= 1.0:
            raise ConfigurationError(f"s must lie in (-1, 1]: got {self.s}")
        if not self.gamma > 0.0:
            raise ConfigurationError(f"gamma must be positive: got {self.gamma}")

    @property
    def direction(self) -> complex:
        return cmath.exp(1j * math.pi * self.s)

    def decays(self, alpha: float) -> bool:
        return abs(self.s) > alpha / 2

    def require_decay(self, alpha: float) -> None:
        if not self.decays(alpha):
            raise NonDecaySectorError(self.s, alpha)


@dataclass(frozen=True)
class ContourSpec:
    """Geometry and base resolution of the contour :math:`C_{\\rho,\\omega}`.

    ``nodes_ray`` and ``nodes_arc`` are Gauss-Legendre points per panel; the
    number of panels is controlled by the refinement level of each
    evaluation.
    """

    omega: float
    ray_truncation: float
    rho: float = 1.0
    nodes_ray: int = 16
    nodes_arc: int = 16

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise ConfigurationError(f"rho must be positive: got {self.rho}")
        if not 0 < self.omega < math.pi:
            raise ConfigurationError(f"omega must lie in (0, pi): got {self.omega}")
        if self.ray_truncation <= self.rho:
            raise ConfigurationError("ray_truncation must exceed rho")
        if self.nodes_ray < 1 or self.nodes_arc < 1:
            raise ConfigurationError("node counts must be positive")

    @classmethod
    def for_ray(cls, params: MLParams, ray: RaySpec, rho: float = 1.0) -> ContourSpec:
        omega = choose_omega(params, ray)
        return cls(omega=omega, ray_truncation=ray_truncation(params, omega, rho), rho=rho)

    def validate(self, params: MLParams, ray: RaySpec) -> None:
        ray.require_decay(params.alpha)
        lo = params.alpha * math.pi / 2
        hi = min(abs(ray.s), params.alpha) * math.pi
        if not lo < self.omega < hi:
            raise ConfigurationError(
                f"contour opening omega={self.omega:.6g} outside ({lo:.6g}, {hi:.6g})"
            )


def choose_omega(params: MLParams, ray: RaySpec) -> float:
    """Midpoint of the admissible opening interval
    :math:`(\\alpha\\pi/2, \\min\\{|s|, \\alpha\\}\\pi)`."""
    ray.require_decay(params.alpha)
    return 0.5 * (params.alpha * math.pi / 2 + min(abs(ray.s), params.alpha) * math.pi)


def contour_distance_lower_bound(ray: RaySpec, omega: float) -> float:
    """Lower bound :math:`|\\sin(\\pi|s| - \\omega)|` on the distance between
    the ray and the unit-radius contour."""
    return abs(math.sin(math.pi * abs(ray.s) - omega))


def ray_truncation(params: MLParams, omega: float, rho: float = 1.0) -> float:
    """Outer radius where the ray integrand drops below ``1e-16``.

    Solves :math:`t^{(1-\\beta)/\\alpha} e^{t^{1/\\alpha}\\cos(\\omega/\\alpha)} = 10^{-16}`
    by bisection on the logarithm; the left side is eventually decreasing
    because :math:`\\cos(\\omega/\\alpha) < 0` for admissible openings.
    """
    alpha, beta = params.alpha, params.beta
    c = math.cos(omega / alpha)
    if c >= 0:
        raise ConfigurationError(
            f"cos(omega/alpha) = {c:.3g} >= 0: the contour integral does not converge"
        )

    def g(t: float) -> float:
        return (1 - beta) / alpha * math.log(t) + t ** (1 / alpha) * c - _TAIL_LOG

    # g increases up to t_peak (only when beta < 1) and decreases afterwards
    t_peak = ((1 - beta) / -c) ** alpha if beta < 1 else rho
    lo = max(rho, t_peak)
    if g(lo) <= 0:
        return max(2.0 * rho, lo)
    hi = 2.0 * lo
    while g(hi) > 0:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return max(hi, 2.0 * rho)


# }}}


# {{{ series


def _series_log_terms(alpha: float, beta: float, absz: float, kmax: int) -> np.ndarray:
    k = np.arange(kmax, dtype=float)
    with np.errstate(divide="ignore"):
        return k * math.log(absz) - gammaln(alpha * k + beta)


def mlf_series(
    params: MLParams | tuple[float, float], z: complex, *, max_terms: int = 100_000
) -> complex:
    """Sum the defining power series of :math:`E_{\\alpha,\\beta}(z)`.

    The series converges for every ``alpha > 0``, so a plain ``(alpha, beta)``
    pair is accepted for orders outside :class:`MLParams` (for instance
    :math:`E_{2,1}(z) = \\cosh\\sqrt z`).

    Summation stops once three consecutive terms, past the largest one, fall
    below ``1e-17`` of the partial sum. When the largest term exceeds the
    result by many orders of magnitude (small ``alpha``, large ``|z|``) the
    sum is carried out in extended precision with enough guard digits to
    absorb the cancellation.

    :raises SeriesBudgetExceeded: if ``max_terms`` terms do not suffice.
    """
    if isinstance(params, MLParams):
        alpha, beta = params.alpha, params.beta
    else:
        alpha, beta = (float(v) for v in params)
        if not (alpha > 0 and beta > 0):
            raise ConfigurationError(f"need alpha > 0 and beta > 0: got ({alpha}, {beta})")
    z = complex(z)
    if z == 0:
        return complex(rgamma(beta))

    absz = abs(z)
    # locate the peak term: psi(alpha k + beta) = log|z| / alpha
    kpeak = 0
    if absz > 1:
        kpeak = int(math.ceil(max(absz ** (1 / alpha) - beta, 0.0) / alpha)) + 1
    if kpeak > max_terms:
        raise SeriesBudgetExceeded(
            "series budget exceeded", z=z, terms=max_terms, peak_term=kpeak
        )
    log_terms = _series_log_terms(alpha, beta, absz, min(max_terms, 4 * kpeak + 64))
    log_peak = float(np.max(log_terms))

    if log_peak <= math.log(10.0):
        return _series_double(alpha, beta, z, kpeak, max_terms)
    dps = 20 + int(math.ceil(log_peak / math.log(10.0)))
    return _series_mp(alpha, beta, z, kpeak, max_terms, dps)


def _series_double(
    alpha: float, beta: float, z: complex, kpeak: int, max_terms: int
) -> complex:
    logz = cmath.log(z)
    total = 0j
    small = 0
    for k in range(max_terms):
        term = cmath.exp(k * logz - gammaln(alpha * k + beta))
        total += term
        if k > kpeak and abs(term) < 1e-17 * abs(total):
            small += 1
            if small == 3:
                return total
        else:
            small = 0
    raise SeriesBudgetExceeded("series budget exceeded", z=z, terms=max_terms)


def _series_mp(
    alpha: float, beta: float, z: complex, kpeak: int, max_terms: int, dps: int
) -> complex:
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        b = mpmath.mpf(beta)
        zz = mpmath.mpc(z)
        power = mpmath.mpc(1)
        total = mpmath.mpc(0)
        small = 0
        for k in range(max_terms):
            term = power * mpmath.rgamma(a * k + b)
            total += term
            if k > kpeak and abs(term) < mpmath.mpf("1e-17") * abs(total):
                small += 1
                if small == 3:
                    return complex(total)
            else:
                small = 0
            power *= zz
    raise SeriesBudgetExceeded("series budget exceeded", z=z, terms=max_terms)


def series_small(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    """Vectorised series for ``|z| <= 1/2`` where no cancellation occurs."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    power = np.ones_like(z)
    for k in range(400):
        term = power * rgamma(alpha * k + beta)
        out += term
        if k > 8 and np.all(np.abs(term) <= 1e-18 * np.abs(out)):
            break
        power = power * z
    return out


# }}}


# {{{ contour quadrature


class _ContourRule(NamedTuple):
    nodes: np.ndarray
    """Quadrature nodes on the contour."""
    weights: np.ndarray
    """Weights including the density e^{zeta^{1/alpha}} zeta^{(1-beta)/alpha} / (2 pi i alpha)."""


def _ray_edges(rho: float, T: float, level: int, extra: tuple[float, ...]) -> np.ndarray:
    q = 2.0 ** (1.0 / 2 ** (level + 1))
    m = max(1, int(math.ceil(math.log(T / rho) / math.log(q))))
    edges = rho * q ** np.arange(m + 1)
    edges[-1] = T
    pts = [t for t in extra if rho < t < T]
    if pts:
        edges = np.unique(np.concatenate([edges, pts]))
    return edges


def _build_rule(
    params: MLParams, contour: ContourSpec, level: int, extra: tuple[float, ...] = ()
) -> _ContourRule:
    alpha, beta = params.alpha, params.beta
    omega, rho = contour.omega, contour.rho

    xa, wa = gauss_legendre(contour.nodes_arc)
    n_arc = 4 * 2**level
    th = np.linspace(-omega, omega, n_arc + 1)
    a, b = th[:-1, None], th[1:, None]
    theta = (0.5 * (a + b) + 0.5 * (b - a) * xa).ravel()
    z_arc = rho * np.exp(1j * theta)
    w_arc = (0.5 * (b - a) * wa).ravel() * 1j * z_arc

    xr, wr = gauss_legendre(contour.nodes_ray)
    edges = _ray_edges(rho, contour.ray_truncation, level, extra)
    a, b = edges[:-1, None], edges[1:, None]
    t = (0.5 * (a + b) + 0.5 * (b - a) * xr).ravel()
    wt = (0.5 * (b - a) * wr).ravel()
    up = np.exp(1j * omega)
    # lower ray is traversed inwards, upper ray outwards
    z = np.concatenate([t * np.conj(up), z_arc, t * up])
    w = np.concatenate([-wt * np.conj(up), w_arc, wt * up])

    density = np.exp(z ** (1 / alpha)) * z ** ((1 - beta) / alpha) / (2j * math.pi * alpha)
    return _ContourRule(z, w * density)


@lru_cache(maxsize=128)
def _cached_rule(params: MLParams, contour: ContourSpec, level: int) -> _ContourRule:
    rule = _build_rule(params, contour, level)
    rule.nodes.setflags(write=False)
    rule.weights.setflags(write=False)
    return rule


def _contour_sum(rule: _ContourRule, z: complex, power: int) -> tuple[complex, float]:
    terms = rule.weights / (rule.nodes - z) ** power
    return complex(np.sum(terms)), float(np.sum(np.abs(terms)))


def _refine(
    params: MLParams,
    ray: RaySpec,
    r: float,
    contour: ContourSpec,
    power: int,
    rtol: float,
    max_level: int,
) -> complex:
    z = r * ray.direction
    if __debug__:
        bound = contour.rho * contour_distance_lower_bound(ray, contour.omega)
    previous = None
    for level in range(max_level + 1):
        rule = _build_rule(params, contour, level, extra=(abs(z),))
        if __debug__:
            gap = float(np.min(np.abs(rule.nodes - z)))
            assert gap >= bound * (1 - 1e-12), (gap, bound)
        value, magnitude = _contour_sum(rule, z, power)
        if previous is not None:
            tol = max(rtol * abs(value), 64 * _EPS * magnitude)
            if abs(value - previous) <= tol:
                return value
        previous = value
    raise QuadratureStagnation(
        "quadrature stagnation", z=z, last=value, previous=previous, level=max_level
    )


def mlf_contour(
    params: MLParams,
    ray: RaySpec,
    r: float,
    contour: ContourSpec | None = None,
    *,
    rtol: float = 1e-12,
    max_level: int = 8,
) -> complex:
    """Evaluate :math:`E_{\\alpha,\\beta}(r e^{i\\pi s})` by the contour integral.

    Note that ``r`` is the modulus of the argument; the ray power
    ``ray.gamma`` is not applied here (see :func:`mlf_ray`).

    The panel count doubles until two successive refinements agree to
    ``rtol`` (or to the roundoff level of the quadrature sum).
    """
    if r < 0:
        raise ConfigurationError(f"r must be non-negative: got {r}")
    if contour is None:
        contour = ContourSpec.for_ray(params, ray)
    contour.validate(params, ray)
    return _refine(params, ray, r, contour, 1, rtol, max_level)


def mlf_derivative(
    params: MLParams,
    ray: RaySpec,
    r: float,
    k: int,
    contour: ContourSpec | None = None,
    *,
    rtol: float = 1e-12,
    max_level: int = 8,
) -> complex:
    """``k``-th derivative of :math:`r \\mapsto E_{\\alpha,\\beta}(r e^{i\\pi s})`.

    This is :math:`e^{i\\pi k s} E^{(k)}_{\\alpha,\\beta}(r e^{i\\pi s})`; divide by
    ``ray.direction ** k`` to obtain the derivative with respect to ``z``.
    """
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
        raise ConfigurationError(f"derivative order must be a non-negative integer: {k!r}")
    if k == 0:
        return mlf_contour(params, ray, r, contour, rtol=rtol, max_level=max_level)
    if r < 0:
        raise ConfigurationError(f"r must be non-negative: got {r}")
    if contour is None:
        contour = ContourSpec.for_ray(params, ray)
    contour.validate(params, ray)
    value = _refine(params, ray, r, contour, k + 1, rtol, max_level)
    return math.factorial(k) * ray.direction**k * value


# }}}


# {{{ dispatcher


class RayEvaluation(NamedTuple):
    value: complex
    method: str
    """Either ``"series"`` or ``"contour"``."""
    health: float | None
    """Relative series/contour disagreement in the overlap band, else ``None``."""


def evaluate_ray(
    params: MLParams,
    ray: RaySpec,
    r: float,
    *,
    method: str = "auto",
    series_radius: float = SERIES_RADIUS,
) -> RayEvaluation:
    """Evaluate :math:`E_{\\alpha,\\beta}(e^{i\\pi s} r^\\gamma)` with method selection.

    ``method="auto"`` uses the series for ``|z| <= series_radius`` and the
    contour integral beyond; in ``[series_radius / 2, series_radius]`` both
    are computed and their relative difference is reported as ``health``.
    """
    if r < 0:
        raise ConfigurationError(f"r must be non-negative: got {r}")
    if method not in ("auto", "series", "contour"):
        raise ConfigurationError(f"unknown method {method!r}")
    x = r**ray.gamma
    z = x * ray.direction
    if method == "series":
        return RayEvaluation(mlf_series(params, z), "series", None)
    if method == "contour":
        ray.require_decay(params.alpha)
        return RayEvaluation(mlf_contour(params, ray, x), "contour", None)

    if x > series_radius:
        if not ray.decays(params.alpha):
            raise ContourUnavailable(
                f"ray inside the non-decay sector and |z| = {x:g} exceeds the series radius",
                s=ray.s,
                alpha=params.alpha,
            )
        return RayEvaluation(mlf_contour(params, ray, x), "contour", None)

    value = mlf_series(params, z)
    health = None
    if x >= series_radius / 2 and ray.decays(params.alpha):
        other = mlf_contour(params, ray, x)
        health = abs(value - other) / max(abs(value), 1e-300)
        if health > OVERLAP_TOLERANCE:
            logger.warning(
                "series/contour disagreement %.3e at z=%s (alpha=%g, beta=%g)",
                health, z, params.alpha, params.beta,
            )
    return RayEvaluation(value, "series", health)


def mlf_ray(params: MLParams, ray: RaySpec, r: float, **kwargs: object) -> complex:
    """Value of :math:`E_{\\alpha,\\beta}(e^{i\\pi s} r^\\gamma)`; see :func:`evaluate_ray`."""
    return evaluate_ray(params, ray, r, **kwargs).value  # type: ignore[arg-type]


# }}}


# {{{ batch evaluation


class RayKernel:
    """Vectorised :math:`r \\mapsto E_{\\alpha,\\beta}(e^{i\\pi s} r^\\gamma)` on a decay ray.

    A single contour rule serves every argument on the ray. Its refinement
    level is fixed at construction by doubling until two successive levels
    agree to ``rtol`` on a probe set spanning all moduli. Arguments with
    ``|z| <= 1/2`` use the (cancellation-free) power series, and arguments
    beyond :attr:`asymptotic_threshold` use the algebraic expansion
    :math:`-\\sum_{k=1}^{K} z^{-k}/\\Gamma(\\beta - \\alpha k)`, whose
    threshold is checked against the contour rule before use.
    """

    ASYMPTOTIC_TERMS = 12

    def __init__(self, params: MLParams, ray: RaySpec, *, rtol: float = 1e-12,
                 max_level: int = 8) -> None:
        ray.require_decay(params.alpha)
        self.params = params
        self.ray = ray
        self.contour = ContourSpec.for_ray(params, ray)
        self._rotation = ray.direction

        probe = np.concatenate([
            np.geomspace(0.5, 4 * self.contour.ray_truncation + 10, 48),
            np.array([1e6, 1e9]),
        ])
        previous = None
        for level in range(max_level + 1):
            rule = _cached_rule(params, self.contour, level)
            values, magnitude = self._sum(rule, probe)
            if previous is not None:
                tol = np.maximum(rtol * np.abs(values), 64 * _EPS * magnitude)
                if np.all(np.abs(values - previous) <= tol):
                    break
            previous = values
        else:
            raise QuadratureStagnation(
                "quadrature stagnation while calibrating the ray kernel",
                alpha=params.alpha, beta=params.beta, s=ray.s,
            )
        self.level = level
        self._rule = rule
        self._coefficients = np.array(
            [float(rgamma(params.beta - params.alpha * k))
             for k in range(1, self.ASYMPTOTIC_TERMS + 1)]
        )
        self.asymptotic_threshold = self._calibrate_asymptotic(rtol)

    def _asymptotic_candidate(self) -> float:
        """Smallest modulus ``64 * 2**m`` where the omitted algebraic terms and any
        exponentially small contribution are below ``1e-17`` of the leading term."""
        c = np.abs(self._coefficients)
        nonzero = np.flatnonzero(c > 1e-14)
        if nonzero.size == 0 or nonzero[0] >= self.ASYMPTOTIC_TERMS - 3:
            return math.inf
        k_lead = nonzero[0] + 1
        log_lead = math.log(c[k_lead - 1])
        alpha, beta = self.params.alpha, self.params.beta
        s = abs(self.ray.s)
        # the exponential term exp(z^{1/alpha}) is only present for |arg z| <= alpha pi
        rate = -math.cos(math.pi * s / alpha) if s <= alpha else None
        # omitted terms: the last three coefficients bound the truncation
        tail = [(k, math.log(c[k - 1])) for k in range(self.ASYMPTOTIC_TERMS - 2,
                                                        self.ASYMPTOTIC_TERMS + 1)
                if c[k - 1] > 0]
        for m in range(60):
            x = 64.0 * 2.0**m
            lx = math.log(x)
            lead = log_lead - k_lead * lx
            ok = all(lc - k * lx <= lead + math.log(1e-17) for k, lc in tail)
            if ok and rate is not None:
                expo = -math.log(alpha) + (1 - beta) / alpha * lx - rate * x ** (1 / alpha)
                ok = expo <= lead + math.log(1e-17)
            if ok:
                return x
        return math.inf

    def _calibrate_asymptotic(self, rtol: float) -> float:
        x0 = self._asymptotic_candidate()
        if math.isinf(x0):
            return math.inf
        probe = x0 * np.array([1.0, 1.5, 4.0, 1e3])
        reference, magnitude = self._sum(self._rule, probe)
        approx = self._asymptotic(probe)
        tol = np.maximum(rtol * np.abs(reference), 64 * _EPS * magnitude)
        return x0 if np.all(np.abs(approx - reference) <= tol) else math.inf

    def _asymptotic(self, x: np.ndarray) -> np.ndarray:
        w = 1.0 / (np.asarray(x, dtype=float) * self._rotation)
        acc = np.zeros(w.shape, dtype=complex)
        for c in self._coefficients[::-1]:
            acc = (acc + c) * w
        return -acc

    def _sum(
        self, rule: _ContourRule, x: np.ndarray, with_magnitude: bool = True
    ) -> tuple[np.ndarray, np.ndarray | None]:
        z = np.asarray(x, dtype=float) * self._rotation
        values = np.empty(z.shape, dtype=complex)
        magnitude = np.empty(z.shape, dtype=float) if with_magnitude else None
        chunk = max(1, 2_000_000 // rule.nodes.size)
        for i in range(0, z.size, chunk):
            terms = rule.weights / (rule.nodes - z[i:i + chunk, None])
            values[i:i + chunk] = terms.sum(axis=1)
            if magnitude is not None:
                magnitude[i:i + chunk] = np.abs(terms).sum(axis=1)
        return values, magnitude

    def at_modulus(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at :math:`z = e^{i\\pi s} x` for moduli ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape, dtype=complex)
        small = flat <= 0.5
        if np.any(small):
            out[small] = series_small(
                self.params.alpha, self.params.beta, flat[small] * self._rotation
            )
        far = flat >= self.asymptotic_threshold
        if np.any(far):
            out[far] = self._asymptotic(flat[far])
        middle = ~small & ~far
        if np.any(middle):
            out[middle] = self._sum(self._rule, flat[middle], with_magnitude=False)[0]
        return out.reshape(x.shape)

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.at_modulus(np.asarray(r, dtype=float) ** self.ray.gamma)


@lru_cache(maxsize=32)
def ray_kernel(params: MLParams, ray: RaySpec) -> RayKernel:
    """Cached :class:`RayKernel` instance."""
    return RayKernel(params, ray)


# }}}
