r"""Littlewood-Paley diagnostics for the Mittag-Leffler kernel.

Band ``j`` of the kernel is the radial transform of
:math:`\psi_j(r) E_{\alpha,\beta}(e^{i\pi s} r^\gamma)`, a compactly
supported radial integral over :math:`[2^{j-1}, 2^{j+1}]`. Its
:math:`L^p(\mathbb{R}^d)` norm is compared with the envelope
:math:`2^{d(1-1/p)j + \delta(j)}`, :math:`\delta(j) = -\gamma j` for
:math:`j > 0` and 0 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, QuadratureStagnation
from .io import dumps_json, write_rows
from .mlf import MLParams, RaySpec
from .partition import band_multiplier, bump
from .radial import (
    RadialSamples,
    _block_geometry,
    _block_rule,
    _panel_count,
    _radial_factor,
    block_integral,
    kernel_profile,
    lp_norm_radial,
)

__all__ = [
    "BandReport",
    "DeltaExponent",
    "band_grid",
    "band_lp_norm",
    "band_multiplier",
    "band_projection",
    "band_samples",
    "bump",
    "verify_band_bound",
]


@dataclass(frozen=True)
class DeltaExponent:
    """High-frequency gain :math:`\\delta(j)`."""

    gamma: float

    def __call__(self, j: int) -> float:
        return -self.gamma * j if j > 0 else 0.0


def envelope(d: int, p: float, gamma: float, j: int) -> float:
    """Predicted band size :math:`2^{d(1-1/p)j + \\delta(j)}`."""
    return 2.0 ** (d * (1 - 1 / p) * j + DeltaExponent(gamma)(j))


def band_projection(
    params: MLParams,
    ray: RaySpec,
    d: int,
    j: int,
    xi: float,
    *,
    rtol: float = 1e-9,
) -> complex:
    """Band ``j`` of the kernel transform at :math:`|\\xi| = \\xi`.

    The block rule is checked against one with twice as many panels.
    """
    ray.require_decay(params.alpha)
    if not xi > 0:
        raise ConfigurationError(f"xi must be positive: got {xi}")
    profile = kernel_profile(params, ray)
    coarse = block_integral(profile, d, j, xi)
    m = _panel_count(xi, 2.0 ** (j - 1))
    r, w = _block_rule(profile, d, j, 2 * m)
    fine = complex(np.sum(w * _radial_factor(d, xi, r)))
    geometry = _block_geometry(profile.breakpoints, d, j, 2 * m)[1]
    noise = profile.absolute_noise * float(np.sum(np.abs(geometry * _radial_factor(d, xi, r))))
    floor = max(1e3 * np.finfo(float).eps * coarse.magnitude, noise)
    if abs(fine - coarse.value) > max(rtol * abs(fine), floor):
        raise QuadratureStagnation(
            "band quadrature did not converge",
            j=j, xi=xi, coarse=coarse.value, fine=fine,
        )
    return fine


def band_grid(d: int, j: int, per_octave: int = 8, u_max_octave: int = 10) -> np.ndarray:
    """Frequency grid for band ``j``: :math:`\\xi = 2^{-j}u` with ``u`` log-spaced.

    Band ``j`` is essentially constant for :math:`u \\ll 1` and decays faster
    than any power for :math:`u \\gg 1`; the lower end is chosen so that the
    constant head carries about ``2**-32`` of the peak contribution, which
    leaves room for bands whose body is much smaller than their peak.
    """
    lo = -int(math.ceil(32 / d))
    k = np.arange(lo * per_octave, u_max_octave * per_octave + 1)
    return 2.0 ** (k / per_octave - j)


def band_samples(
    params: MLParams, ray: RaySpec, d: int, j: int, xi_grid: np.ndarray | None = None
) -> RadialSamples:
    ray.require_decay(params.alpha)
    if xi_grid is None:
        xi_grid = band_grid(d, j)
    profile = kernel_profile(params, ray)
    values = [block_integral(profile, d, j, float(x)).value for x in xi_grid]
    return RadialSamples(np.asarray(xi_grid, dtype=float), np.array(values), d)


def band_lp_norm(
    params: MLParams,
    ray: RaySpec,
    d: int,
    j: int,
    p: float,
    xi_grid: np.ndarray | None = None,
) -> float:
    """:math:`L^p(\\mathbb{R}^d)` norm of band ``j``."""
    return lp_norm_radial(band_samples(params, ray, d, j, xi_grid), p)


@dataclass(frozen=True)
class BandReport:
    d: int
    p: float
    gamma: float
    js: np.ndarray
    norms: np.ndarray
    envelopes: np.ndarray
    ratios: np.ndarray = field(init=False)
    high_rate: float = field(init=False)
    """Fitted geometric ratio of consecutive band norms for ``j > 0``."""
    low_rate: float = field(init=False)
    """Fitted ratio :math:`n_{j-1}/n_j` for ``j <= 0``."""
    trend: float = field(init=False)
    """Slope of :math:`\\log_2` ratio against ``j`` over ``j > 0``."""

    def __post_init__(self) -> None:
        ratios = self.norms / self.envelopes
        object.__setattr__(self, "ratios", ratios)
        hi = self.js > 0
        lo = self.js <= 0
        log_n = np.log2(self.norms)
        high = np.polyfit(self.js[hi], log_n[hi], 1)[0] if np.count_nonzero(hi) >= 2 else math.nan
        low = np.polyfit(self.js[lo], log_n[lo], 1)[0] if np.count_nonzero(lo) >= 2 else math.nan
        trend = (
            np.polyfit(self.js[hi], np.log2(ratios[hi]), 1)[0]
            if np.count_nonzero(hi) >= 2 else math.nan
        )
        object.__setattr__(self, "high_rate", float(2.0**high))
        object.__setattr__(self, "low_rate", float(2.0**-low))
        object.__setattr__(self, "trend", float(trend))

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))

    @property
    def expected_high_rate(self) -> float:
        return 2.0 ** (self.d * (1 - 1 / self.p) - self.gamma)

    @property
    def expected_low_rate(self) -> float:
        return 2.0 ** (-self.d * (1 - 1 / self.p))

    @property
    def summable(self) -> bool:
        """Both tails of :math:`\\sum_j n_j` shrink geometrically."""
        return bool(self.high_rate < 1 and self.low_rate < 1)

    def tail_ratios(self) -> tuple[np.ndarray, np.ndarray]:
        """Successive ratios of the partial-sum tails on each side, within the window."""
        n = self.norms
        hi = n[self.js > 0]
        lo = n[self.js <= 0][::-1]
        t_hi = np.cumsum(hi[::-1])[::-1]
        t_lo = np.cumsum(lo[::-1])[::-1]
        return t_hi[1:] / t_hi[:-1], t_lo[1:] / t_lo[:-1]

    def summary(self) -> dict:
        return {
            "d": self.d,
            "p": self.p,
            "gamma": self.gamma,
            "j_min": int(self.js[0]),
            "j_max": int(self.js[-1]),
            "max_ratio": self.max_ratio,
            "trend": self.trend,
            "high_rate": self.high_rate,
            "expected_high_rate": self.expected_high_rate,
            "low_rate": self.low_rate,
            "expected_low_rate": self.expected_low_rate,
            "summable": self.summable,
        }

    def to_csv(self, path: str | Path) -> None:
        rows = [
            [int(j), float(r), float(n), float(e)]
            for j, r, n, e in zip(self.js, self.ratios, self.norms, self.envelopes)
        ]
        write_rows(path, ["j", "ratio", "band_norm", "envelope"], rows)

    def to_json(self) -> str:
        return dumps_json(self.summary())


def verify_band_bound(
    params: MLParams,
    ray: RaySpec,
    d: int,
    p: float,
    j_range: tuple[int, int] = (-10, 14),
) -> BandReport:
    """Band norms and their ratios to the envelope for ``j`` in ``j_range`` (inclusive).

    Exponents outside :func:`admissible_exponents` are accepted; the report
    then shows a high-band rate of at least one (``summable`` false).
    """
    ray.require_decay(params.alpha)
    if not p > 1:
        raise ConfigurationError(f"the band bound needs p > 1: got {p}")
    js = np.arange(j_range[0], j_range[1] + 1)
    norms = np.array([band_lp_norm(params, ray, d, int(j), p) for j in js])
    envs = np.array([envelope(d, p, ray.gamma, int(j)) for j in js])
    return BandReport(d, p, ray.gamma, js, norms, envs)
