r"""Spectral solver for the space-time fractional Cauchy problem

.. math::

    e^{i\mu\pi}\,\partial_t^\alpha u = e^{i\nu\pi}(-\Delta)^{\beta/2} u + F,
    \qquad u(0) = f,

with :math:`\partial_t^\alpha` the Caputo derivative. The symbol of
:math:`(-\Delta)^{\beta/2}` is taken to be :math:`|\xi|^\beta` with :math:`\xi`
the frequency of the :math:`e^{-2\pi i x\cdot\xi}` transform, so that the
solution is

.. math::

    \hat u(t,\xi) = E_\alpha(e^{i\pi s} t^\alpha|\xi|^\beta)\hat f(\xi)
      + e^{-i\mu\pi}\int_0^t (t-\sigma)^{\alpha-1}
        E_{\alpha,\alpha}(e^{i\pi s}(t-\sigma)^\alpha|\xi|^\beta)\hat F(\sigma,\xi)\,d\sigma,

where :math:`s = \nu - \mu` reduced into :math:`(-1, 1]`. Space is discretised
on a periodic box with the FFT.
"""

from __future__ import annotations

import logging
import math
import struct
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import (
    ConfigurationError,
    ContourUnavailable,
    DomainTooSmall,
    UnsupportedOrderError,
)
from .io import write_rows
from .mlf import SERIES_RADIUS, MLParams, RaySpec, mlf_ray, mlf_series, ray_kernel
from .quadrature import gauss_jacobi, gauss_legendre
from .radial import mlf_kernel_hat

logger = logging.getLogger(__name__)

BINARY_MAGIC = b"MLF1"


class ResolutionWarning(UserWarning):
    """The spatial grid does not resolve the solution's spectrum."""


def wrap_phase(s: float) -> float:
    """Reduce ``s`` into :math:`(-1, 1]` (the phase :math:`e^{i\\pi s}` is 2-periodic)."""
    r = math.fmod(s, 2.0)
    if r <= -1.0:
        r += 2.0
    elif r > 1.0:
        r -= 2.0
    return r


# {{{ data descriptors


@dataclass(frozen=True)
class FieldProfile:
    """Named analytic profile on :math:`\\mathbb{R}^d`.

    * ``gaussian``: :math:`a\\,e^{-|x|^2/(2\\sigma^2)}`
    * ``super_gaussian``: :math:`a\\,e^{-(|x|^2/(2\\sigma^2))^{m}}`
    * ``modulated_gaussian``: :math:`a\\,e^{-|x|^2/(2\\sigma^2)} e^{2\\pi i k x_0}`
    """

    name: str = "gaussian"
    sigma: float = 1.0
    amplitude: float = 1.0
    order: float = 2.0
    wavenumber: float = 0.0

    def __post_init__(self) -> None:
        if self.name not in ("gaussian", "super_gaussian", "modulated_gaussian"):
            raise ConfigurationError(f"unknown profile {self.name!r}")
        if not self.sigma > 0:
            raise ConfigurationError(f"profile width must be positive: got {self.sigma}")

    def __call__(self, coords: Sequence[np.ndarray]) -> np.ndarray:
        r2 = sum(c**2 for c in coords) / (2 * self.sigma**2)
        if self.name == "super_gaussian":
            out = np.exp(-(r2**self.order))
        else:
            out = np.exp(-r2)
        out = self.amplitude * out.astype(complex)
        if self.name == "modulated_gaussian":
            out = out * np.exp(2j * math.pi * self.wavenumber * coords[0])
        return out

    def dilated(self, factor: float) -> FieldProfile:
        """Profile :math:`x \\mapsto f(x/\\text{factor})`."""
        return FieldProfile(
            self.name, self.sigma * factor, self.amplitude, self.order,
            self.wavenumber / factor,
        )


@dataclass(frozen=True)
class ForcingProfile:
    """Separable forcing :math:`F(t,x) = a(t) g(x)`, ``a = 1`` or ``(1 + t)^{-kappa}``."""

    spatial: FieldProfile
    temporal: str = "constant"
    kappa: float = 0.0

    def __post_init__(self) -> None:
        if self.temporal not in ("constant", "power"):
            raise ConfigurationError(f"unknown temporal profile {self.temporal!r}")

    def amplitude(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.temporal == "constant":
            return np.ones_like(t)
        return (1.0 + t) ** (-self.kappa)


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    beta: float
    mu: float
    nu: float
    initial: FieldProfile | None = None
    forcing: ForcingProfile | None = None

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 2:
            raise ConfigurationError(f"alpha must lie in (0, 2): got {self.alpha}")
        if not self.beta > 0:
            raise ConfigurationError(f"beta must be positive: got {self.beta}")
        for name in ("mu", "nu"):
            v = getattr(self, name)
            if not -1 < v <= 1:
                raise ConfigurationError(f"{name} must lie in (-1, 1]: got {v}")

    @property
    def s_eff(self) -> float:
        return wrap_phase(self.nu - self.mu)

    @property
    def decays(self) -> bool:
        return abs(self.s_eff) > self.alpha / 2

    def require_decay(self) -> None:
        if not self.decays:
            raise ConfigurationError(
                f"ray inside the non-decay sector: |nu - mu| = {abs(self.s_eff):g} "
                f"<= alpha/2 = {self.alpha / 2:g}"
            )

    @property
    def dispersive_rate(self) -> float:
        """:math:`\\alpha/\\beta`, the exponent of the self-similar width :math:`t^{\\alpha/\\beta}`."""
        return self.alpha / self.beta


@dataclass(frozen=True)
class Grid:
    """Periodic box :math:`[-L/2, L/2)^d` with ``n`` points per axis."""

    d: int
    n: int
    L: float

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ConfigurationError(f"dimension must be positive: got {self.d}")
        if self.n < 2 or self.n & (self.n - 1):
            raise ConfigurationError(f"points per axis must be a power of two: got {self.n}")
        if not self.L > 0:
            raise ConfigurationError(f"box length must be positive: got {self.L}")

    @property
    def h(self) -> float:
        return self.L / self.n

    def axis(self) -> np.ndarray:
        return -0.5 * self.L + self.h * np.arange(self.n)

    def coords(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.axis()] * self.d), indexing="ij", sparse=True)

    def frequency_modulus(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n, d=self.h)
        grids = np.meshgrid(*([k] * self.d), indexing="ij", sparse=True)
        return np.sqrt(sum(g**2 for g in grids))

    @property
    def nyquist(self) -> float:
        return 0.5 * self.n / self.L


@dataclass(frozen=True)
class SpectralField:
    """Samples of a field on a :class:`Grid` (row-major, axis order ``x0, x1, ...``)."""

    d: int
    n: int
    L: float
    values: np.ndarray

    def __post_init__(self) -> None:
        Grid(self.d, self.n, self.L)
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.n,) * self.d:
            raise ConfigurationError(f"values must have shape {(self.n,) * self.d}")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def grid(self) -> Grid:
        return Grid(self.d, self.n, self.L)

    def norm(self, q: float) -> float:
        """Discrete :math:`L^q` norm (Riemann sum; ``q = inf`` is the maximum)."""
        mag = np.abs(self.values)
        if math.isinf(q):
            return float(np.max(mag))
        return float((np.sum(mag**q) * self.grid.h**self.d) ** (1 / q))

    # {{{ serialization

    def to_csv(self, path: str | Path) -> None:
        idx = np.indices(self.values.shape).reshape(self.d, -1).T
        flat = self.values.reshape(-1)
        header = [f"i{k}" for k in range(self.d)] + ["re", "im"]
        rows = [[*map(int, i), float(v.real), float(v.imag)] for i, v in zip(idx, flat)]
        write_rows(path, header, rows)

    @classmethod
    def from_csv(cls, path: str | Path, L: float) -> SpectralField:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        d = data.shape[1] - 2
        n = int(round(data.shape[0] ** (1 / d)))
        values = np.zeros((n,) * d, dtype=complex)
        values[tuple(data[:, :d].astype(int).T)] = data[:, d] + 1j * data[:, d + 1]
        return cls(d, n, L, values)

    def to_bytes(self) -> bytes:
        header = BINARY_MAGIC + struct.pack("<IId", self.d, self.n, self.L)
        body = np.ascontiguousarray(self.values, dtype="<c16").tobytes()
        return header + body

    @classmethod
    def from_bytes(cls, data: bytes) -> SpectralField:
        if data[:4] != BINARY_MAGIC:
            raise ConfigurationError("not an MLF1 field snapshot")
        d, n, L = struct.unpack("<IId", data[4:20])
        values = np.frombuffer(data[20:], dtype="<c16").reshape((n,) * d)
        return cls(d, n, L, values)

    def to_binary(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def from_binary(cls, path: str | Path) -> SpectralField:
        return cls.from_bytes(Path(path).read_bytes())

    # }}}


# }}}


# {{{ multipliers


def _ml_values(alpha: float, beta: float, s: float, x: np.ndarray) -> np.ndarray:
    """:math:`E_{\\alpha,\\beta}(e^{i\\pi s} x)` for an array of moduli ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    params = MLParams(alpha, beta)
    ray = RaySpec(s, 1.0)
    if ray.decays(alpha):
        return ray_kernel(params, ray).at_modulus(x)
    if np.max(x, initial=0.0) > SERIES_RADIUS:
        raise ContourUnavailable(
            "contour unavailable: ray inside the non-decay sector and argument "
            f"{np.max(x):.3g} exceeds the series radius",
            s=s, alpha=alpha,
        )
    uniq, inv = np.unique(x.ravel(), return_inverse=True)
    vals = np.array([mlf_series(params, xx * ray.direction) for xx in uniq])
    return vals[inv].reshape(x.shape)


def solution_multiplier(spec: ProblemSpec, t: float, xi_mod: float) -> complex:
    """:math:`E_\\alpha(e^{i\\pi s} t^\\alpha|\\xi|^\\beta)` at a single frequency."""
    if t < 0:
        raise ConfigurationError(f"t must be non-negative: got {t}")
    x = t**spec.alpha * xi_mod**spec.beta
    return mlf_ray(MLParams(spec.alpha, 1.0), RaySpec(spec.s_eff, 1.0), x)


def multiplier_array(
    spec: ProblemSpec, t: float, xi_mod: np.ndarray, *, second_index: float = 1.0
) -> np.ndarray:
    """Vectorised multiplier :math:`E_{\\alpha,b}(e^{i\\pi s} t^\\alpha|\\xi|^\\beta)`."""
    xi_mod = np.asarray(xi_mod, dtype=float)
    uniq, inv = np.unique(xi_mod.ravel(), return_inverse=True)
    vals = _ml_values(spec.alpha, second_index, spec.s_eff, t**spec.alpha * uniq**spec.beta)
    return vals[inv].reshape(xi_mod.shape)


# }}}


# {{{ homogeneous problem


def sample(profile: FieldProfile, grid: Grid) -> SpectralField:
    return SpectralField(grid.d, grid.n, grid.L, profile(grid.coords()))


def _check_resolution(spectrum: np.ndarray, grid: Grid, what: str) -> None:
    mag = np.abs(spectrum)
    peak = float(np.max(mag))
    if peak == 0:
        return
    shell = grid.frequency_modulus() >= 0.95 * grid.nyquist
    shell = np.broadcast_to(shell, mag.shape)
    edge = float(np.max(mag[shell]))
    if edge > 1e-10 * peak:
        warnings.warn(
            f"{what}: spectrum at the Nyquist shell is {edge / peak:.2e} of its peak; "
            "refine the grid",
            ResolutionWarning,
            stacklevel=3,
        )


def check_box(field: SpectralField, tol: float = 1e-6) -> None:
    """Require the field to be negligible in the outer sixteenth of the box.

    :raises DomainTooSmall: when the maximum over that layer exceeds ``tol``
        times the global maximum.
    """
    mag = np.abs(field.values)
    peak = float(np.max(mag))
    if peak == 0:
        return
    x = np.abs(field.grid.axis())
    layer = x >= 0.5 * field.L * (1 - 1 / 8)
    edge = 0.0
    for ax in range(field.d):
        idx = [slice(None)] * field.d
        idx[ax] = layer
        edge = max(edge, float(np.max(mag[tuple(idx)])))
    if edge > tol * peak:
        raise DomainTooSmall(
            "domain too small: solution reaches the boundary layer",
            ratio=edge / peak, box_length=field.L,
        )


def solve_homogeneous(spec: ProblemSpec, t: float, grid: Grid) -> SpectralField:
    """Solution of the problem with ``F = 0`` at time ``t`` on ``grid``."""
    if spec.initial is None:
        raise ConfigurationError("initial data missing")
    if t < 0:
        raise ConfigurationError(f"t must be non-negative: got {t}")
    f = spec.initial(grid.coords())
    fhat = np.fft.fftn(f)
    if t == 0:
        return SpectralField(grid.d, grid.n, grid.L, np.fft.ifftn(fhat))
    m = multiplier_array(spec, t, grid.frequency_modulus())
    uhat = m * fhat
    _check_resolution(uhat, grid, "solve_homogeneous")
    return SpectralField(grid.d, grid.n, grid.L, np.fft.ifftn(uhat))


def kernel_V(spec: ProblemSpec, t: float, x_mod: float, d: int = 1) -> complex:
    """Fundamental solution :math:`V(t,x) = t^{-\\alpha d/\\beta}K(t^{-\\alpha/\\beta}x)`."""
    return _kernel(spec, t, x_mod, d, 1.0)


def kernel_W(spec: ProblemSpec, t: float, x_mod: float, d: int = 1) -> complex:
    """Duhamel kernel, built like :func:`kernel_V` from :math:`E_{\\alpha,\\alpha}`."""
    return _kernel(spec, t, x_mod, d, spec.alpha)


def _kernel(spec: ProblemSpec, t: float, x_mod: float, d: int, b: float) -> complex:
    if not t > 0:
        raise ConfigurationError(f"t must be positive: got {t}")
    spec.require_decay()
    c = t ** (-spec.alpha / spec.beta)
    hat = mlf_kernel_hat(MLParams(spec.alpha, b), RaySpec(spec.s_eff, spec.beta), d, c * x_mod)
    return c**d * hat


# }}}


# {{{ inhomogeneous problem


class TimeQuadrature(NamedTuple):
    t: float
    nodes: np.ndarray
    """Points ``s`` in ``[0, t]``."""
    weights: np.ndarray
    """Weights for :math:`\\int_0^t (t-s)^{\\alpha-1} g(s)\\,ds`."""


def duhamel_quadrature(alpha: float, t: float, n: int) -> TimeQuadrature:
    """Gauss-Jacobi rule for :math:`\\int_0^t (t-s)^{\\alpha-1} g(s)\\,ds` (exact to degree ``2n-1``)."""
    if not 0 < alpha < 2:
        raise ConfigurationError(f"alpha must lie in (0, 2): got {alpha}")
    if not t > 0:
        raise ConfigurationError(f"t must be positive: got {t}")
    # weight (1 - x)^{alpha - 1} on [-1, 1] maps to (t - s)^{alpha - 1}
    x, w = gauss_jacobi(n, alpha - 1.0, 0.0)
    nodes = 0.5 * t * (1 + x)
    weights = (0.5 * t) ** alpha * w
    return TimeQuadrature(t, nodes, weights)


def graded_duhamel_quadrature(
    alpha: float, t: float, n: int, tau_min: float
) -> TimeQuadrature:
    """Composite rule graded geometrically towards ``s = t``.

    In the lag :math:`\\tau = t - s`, the panels are ``[0, tau_min]`` (Gauss-Jacobi
    with the weight :math:`\\tau^{\\alpha-1}`) followed by ``[tau_min 2^k, tau_min 2^{k+1}]``
    (Gauss-Legendre with the weight multiplied in), each with ``n`` points.
    """
    if not 0 < tau_min < t:
        return duhamel_quadrature(alpha, t, n)
    xj, wj = gauss_jacobi(n, 0.0, alpha - 1.0)
    taus = [0.5 * tau_min * (1 + xj)]
    weights = [(0.5 * tau_min) ** alpha * wj]
    xg, wg = gauss_legendre(n)
    edges = tau_min * 2.0 ** np.arange(0, math.ceil(math.log2(t / tau_min)) + 1)
    edges[-1] = t
    edges = edges[edges <= t]
    for a, b in zip(edges[:-1], edges[1:]):
        tau = 0.5 * (a + b) + 0.5 * (b - a) * xg
        taus.append(tau)
        weights.append(0.5 * (b - a) * wg * tau ** (alpha - 1))
    tau = np.concatenate(taus)
    return TimeQuadrature(t, t - tau, np.concatenate(weights))


def solve_inhomogeneous(
    spec: ProblemSpec, t: float, grid: Grid, n_time: int = 16
) -> SpectralField:
    """Duhamel part ``w`` (zero initial data) at time ``t``.

    The time integral uses :func:`graded_duhamel_quadrature` with ``n_time``
    points per panel and the innermost panel short enough to resolve the
    largest active frequency. Frequencies where the forcing is below
    ``1e-17`` of its peak are skipped.
    """
    if spec.forcing is None:
        raise ConfigurationError("forcing descriptor missing")
    if t < 0:
        raise ConfigurationError(f"t must be non-negative: got {t}")
    ghat = np.fft.fftn(spec.forcing.spatial(grid.coords()))
    if t == 0:
        return SpectralField(grid.d, grid.n, grid.L, np.zeros_like(ghat))
    kmod = np.broadcast_to(grid.frequency_modulus(), ghat.shape)
    active = np.abs(ghat) > 1e-17 * np.max(np.abs(ghat))
    xi = kmod[active]
    xi_max = float(np.max(xi, initial=0.0))
    # the integrand changes on the lag scale |xi|^{-beta/alpha}
    tau_min = 1e-3 * min(t, xi_max ** (-spec.beta / spec.alpha)) if xi_max > 0 else t
    rule = graded_duhamel_quadrature(spec.alpha, t, n_time, tau_min)

    uniq, inv = np.unique(xi, return_inverse=True)
    acc = np.zeros(uniq.shape, dtype=complex)
    amp = spec.forcing.amplitude(rule.nodes)
    for s_k, w_k, a_k in zip(rule.nodes, rule.weights, amp):
        x = (t - s_k) ** spec.alpha * uniq**spec.beta
        acc += (w_k * a_k) * _ml_values(spec.alpha, spec.alpha, spec.s_eff, x)
    what = np.zeros_like(ghat)
    what[active] = np.exp(-1j * math.pi * spec.mu) * acc[inv] * ghat[active]
    _check_resolution(what, grid, "solve_inhomogeneous")
    return SpectralField(grid.d, grid.n, grid.L, np.fft.ifftn(what))


def duhamel_constant_forcing(spec: ProblemSpec, t: float, xi_mod: np.ndarray) -> np.ndarray:
    """Closed form :math:`e^{-i\\mu\\pi} t^\\alpha E_{\\alpha,\\alpha+1}(e^{i\\pi s}t^\\alpha|\\xi|^\\beta)`
    of the Duhamel factor for time-independent forcing."""
    x = t**spec.alpha * np.asarray(xi_mod, dtype=float) ** spec.beta
    uniq, inv = np.unique(x.ravel(), return_inverse=True)
    vals = _ml_values(spec.alpha, spec.alpha + 1, spec.s_eff, uniq)[inv].reshape(x.shape)
    return np.exp(-1j * math.pi * spec.mu) * t**spec.alpha * vals


# }}}


# {{{ Caputo residual


def caputo_l1(values: np.ndarray, dt: float, alpha: float) -> np.ndarray:
    """L1 approximation of the Caputo derivative at the last time level.

    ``values`` has the time axis first and is sampled at ``t_k = k dt``.
    """
    if not 0 < alpha < 1:
        raise UnsupportedOrderError(f"the L1 scheme needs 0 < alpha < 1: got {alpha}")
    u = np.asarray(values)
    K = u.shape[0] - 1
    j = np.arange(K, dtype=float)
    b = (j + 1) ** (1 - alpha) - j ** (1 - alpha)
    # sum_j b_j (u_{K-j} - u_{K-j-1})
    du = np.diff(u, axis=0)[::-1]
    acc = np.tensordot(b, du, axes=(0, 0))
    return acc / (dt**alpha * gamma_fn(2 - alpha))


def caputo_residual(
    spec: ProblemSpec,
    times: np.ndarray,
    uhat: np.ndarray,
    xi_mod: np.ndarray,
    forcing_hat: np.ndarray | None = None,
) -> float:
    """Relative residual of the transformed equation at the final time.

    :arg uhat: snapshots of :math:`\\hat u(t_k, \\xi)`, shape ``(len(times), len(xi_mod))``
        on a uniform grid ``t_k = k dt`` starting at zero.
    :arg forcing_hat: :math:`\\hat F(t_K, \\xi)` at the final time, if any.
    """
    if spec.alpha >= 1:
        raise UnsupportedOrderError(
            f"Caputo residual implemented for alpha < 1 only: got {spec.alpha}"
        )
    times = np.asarray(times, dtype=float)
    if times.size < 65:
        raise ConfigurationError("the Caputo residual needs at least 64 time steps")
    dt = times[1] - times[0]
    if abs(times[0]) > 1e-15 or not np.allclose(np.diff(times), dt, rtol=1e-10, atol=0):
        raise ConfigurationError("the Caputo residual needs a uniform grid starting at 0")
    uhat = np.asarray(uhat, dtype=complex)
    xi_mod = np.asarray(xi_mod, dtype=float)
    lhs = np.exp(1j * math.pi * spec.mu) * caputo_l1(uhat, dt, spec.alpha)
    rhs = np.exp(1j * math.pi * spec.nu) * xi_mod**spec.beta * uhat[-1]
    if forcing_hat is not None:
        rhs = rhs + forcing_hat
    scale = float(np.max(np.abs(uhat)))
    return float(np.max(np.abs(lhs - rhs)) / scale)


def homogeneous_snapshots(
    spec: ProblemSpec, t_final: float, steps: int, xi_mod: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Exact multiplier snapshots :math:`E_\\alpha(e^{i\\pi s}t_k^\\alpha|\\xi|^\\beta)` on a uniform grid."""
    times = np.linspace(0.0, t_final, steps + 1)
    xi_mod = np.asarray(xi_mod, dtype=float)
    snaps = np.array([multiplier_array(spec, float(t), xi_mod) for t in times])
    return times, snaps


def caputo_order_study(
    spec: ProblemSpec,
    t_final: float,
    steps: Sequence[int],
    xi_mod: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Residuals under step refinement and the observed orders between levels."""
    res = []
    for n in steps:
        times, snaps = homogeneous_snapshots(spec, t_final, n, xi_mod)
        res.append(caputo_residual(spec, times, snaps, xi_mod))
    res = np.array(res)
    orders = np.log(res[:-1] / res[1:]) / np.log(np.array(steps[1:]) / np.array(steps[:-1]))
    return res, orders


def laplace_identity_residual(
    alpha: float, s_ray: float, modulus: float, s_points: Sequence[float]
) -> float:
    """Check :math:`p^\\alpha\\tilde E - p^{\\alpha-1} = \\lambda\\tilde E` for
    :math:`\\tilde E(p) = \\int_0^\\infty e^{-pt}E_\\alpha(\\lambda t^\\alpha)dt`.

    The Laplace integral is computed by graded Gauss-Legendre quadrature, so
    the identity is a genuine test of the multiplier for any ``0 < alpha < 2``.
    Returns the largest relative residual over ``s_points``.
    """
    lam = modulus * complex(math.cos(math.pi * s_ray), math.sin(math.pi * s_ray))
    worst = 0.0
    x, w = gauss_legendre(32)
    for p in s_points:
        t_max = 60.0 / p
        edges = np.concatenate([[0.0], t_max * 2.0 ** np.arange(-40, 1)])
        a, b = edges[:-1, None], edges[1:, None]
        t = (0.5 * (a + b) + 0.5 * (b - a) * x).ravel()
        wt = (0.5 * (b - a) * w).ravel()
        e = _ml_values(alpha, 1.0, wrap_phase(s_ray), modulus * t**alpha)
        lap = np.sum(wt * np.exp(-p * t) * e)
        res = abs(p**alpha * lap - p ** (alpha - 1) - lam * lap)
        worst = max(worst, res / abs(p ** (alpha - 1)))
    return worst


# }}}


# {{{ decay verification


@dataclass(frozen=True)
class DecayReport:
    times: np.ndarray
    norms: np.ndarray
    """Measured ratios (or norms) at each time."""
    expected: float
    slope: float
    prefactor: float
    """Largest ``norm / t**expected`` over the grid."""
    bounds: np.ndarray = field(repr=False)

    @property
    def deviation(self) -> float:
        return self.slope - self.expected

    def to_csv(self, path: str | Path) -> None:
        rows = [[float(t), float(n), float(b)] for t, n, b in zip(self.times, self.norms, self.bounds)]
        write_rows(path, ["t", "norm_q", "bound"], rows)


def lp_norm(values: np.ndarray, h: float, d: int, p: float) -> float:
    mag = np.abs(values)
    if math.isinf(p):
        return float(np.max(mag))
    return float((np.sum(mag**p) * h**d) ** (1 / p))


def _fit(times: np.ndarray, norms: np.ndarray, expected: float) -> DecayReport:
    slope = float(np.polyfit(np.log(times), np.log(norms), 1)[0])
    scaled = norms / times**expected
    prefactor = float(np.max(scaled))
    return DecayReport(times, norms, expected, slope, prefactor, prefactor * times**expected)


def dispersive_exponent(spec: ProblemSpec, p: float, q: float, d: int) -> float:
    return -spec.dispersive_rate * d * (1 / p - 1 / q)


def check_dispersive_hypotheses(spec: ProblemSpec, p: float, q: float, d: int) -> None:
    if not 1 <= p < q:
        raise ConfigurationError(f"the dispersive estimate needs 1 <= p < q: got p={p}, q={q}")
    if not 1 / p - 1 / q < spec.beta / d:
        raise ConfigurationError(
            f"hypothesis violated: 1/p - 1/q = {1 / p - 1 / q:g} must be < beta/d = {spec.beta / d:g}"
        )
    spec.require_decay()


def verify_dispersive(
    spec: ProblemSpec,
    p: float,
    q: float,
    t_grid: np.ndarray,
    grid: Grid,
    *,
    family: str = "fixed",
) -> DecayReport:
    """Fit the decay of :math:`\\|v(t)\\|_q/\\|f\\|_p` against the exponent
    :math:`-(\\alpha/\\beta)d(1/p - 1/q)`.

    ``family="fixed"`` evolves one initial datum; ``family="dilated"`` uses
    :math:`f_t(x) = f(x/t^{\\alpha/\\beta})` at each ``t``, the data that
    saturate the estimate when ``p > 1``.

    :raises DomainTooSmall: if any snapshot reaches the boundary layer.
    """
    check_dispersive_hypotheses(spec, p, q, grid.d)
    if spec.initial is None:
        raise ConfigurationError("initial data missing")
    if family not in ("fixed", "dilated"):
        raise ConfigurationError(f"unknown data family {family!r}")
    t_grid = np.asarray(t_grid, dtype=float)
    ratios = []
    for t in t_grid:
        s = spec
        if family == "dilated":
            s = ProblemSpec(spec.alpha, spec.beta, spec.mu, spec.nu,
                            spec.initial.dilated(t**spec.dispersive_rate), spec.forcing)
        f = sample(s.initial, grid)
        check_box(f)
        v = solve_homogeneous(s, float(t), grid)
        check_box(v)
        ratios.append(v.norm(q) / f.norm(p))
    return _fit(t_grid, np.array(ratios), dispersive_exponent(spec, p, q, grid.d))


def inhomogeneous_exponent(spec: ProblemSpec, p: float, q: float, r: float, d: int) -> float:
    inv_r = 0.0 if math.isinf(r) else 1 / r
    return spec.dispersive_rate * d * (spec.beta / d - (1 / p - 1 / q)) - inv_r


def check_inhomogeneous_hypotheses(
    spec: ProblemSpec, p: float, q: float, r: float, d: int
) -> None:
    if not 1 <= p < q:
        raise ConfigurationError(f"the estimate needs 1 <= p < q: got p={p}, q={q}")
    if not r > 1 / spec.alpha:
        raise ConfigurationError(f"the estimate needs r > 1/alpha: got r={r}")
    inv_r = 0.0 if math.isinf(r) else 1 / r
    bound = spec.beta / d * (1 - inv_r / spec.alpha)
    if not 1 / p - 1 / q < bound:
        raise ConfigurationError(
            f"hypothesis violated: 1/p - 1/q = {1 / p - 1 / q:g} must be < {bound:g}"
        )
    spec.require_decay()


def verify_inhomogeneous_decay(
    spec: ProblemSpec,
    p: float,
    q: float,
    r: float,
    t_grid: np.ndarray,
    grid: Grid,
    n_time: int = 16,
    method: str = "auto",
) -> DecayReport:
    """Fit the growth exponent of :math:`\\|w(t)\\|_q / \\|F\\|_{L^r L^p}`.

    :arg method: ``"quadrature"`` evaluates the Duhamel integral with
        :func:`solve_inhomogeneous`; ``"closed_form"`` uses
        :func:`duhamel_constant_forcing` and requires time-independent
        forcing; ``"auto"`` picks the closed form whenever it applies.
    """
    check_inhomogeneous_hypotheses(spec, p, q, r, grid.d)
    if spec.forcing is None:
        raise ConfigurationError("forcing descriptor missing")
    constant = spec.forcing.temporal == "constant"
    if method == "auto":
        method = "closed_form" if constant else "quadrature"
    if method not in ("closed_form", "quadrature"):
        raise ConfigurationError(f"unknown method {method!r}")
    if method == "closed_form" and not constant:
        raise ConfigurationError("the closed form needs time-independent forcing")
    g = sample(spec.forcing.spatial, grid)
    check_box(g)
    gp = g.norm(p)
    ghat = np.fft.fftn(g.values)
    xi_mod = np.broadcast_to(grid.frequency_modulus(), ghat.shape)
    t_grid = np.asarray(t_grid, dtype=float)
    norms = []
    for t in t_grid:
        if method == "closed_form":
            what = duhamel_constant_forcing(spec, float(t), xi_mod) * ghat
            _check_resolution(what, grid, "verify_inhomogeneous_decay")
            w = SpectralField(grid.d, grid.n, grid.L, np.fft.ifftn(what))
        else:
            w = solve_inhomogeneous(spec, float(t), grid, n_time)
        check_box(w)
        norms.append(w.norm(q) / (gp * _time_norm(spec.forcing, float(t), r)))
    return _fit(t_grid, np.array(norms), inhomogeneous_exponent(spec, p, q, r, grid.d))


def _time_norm(forcing: ForcingProfile, t: float, r: float) -> float:
    """:math:`\\|a\\|_{L^r(0,t)}` of the temporal factor (the forcing is cut off at ``t``)."""
    if forcing.temporal == "constant":
        return 1.0 if math.isinf(r) else t ** (1 / r)
    if math.isinf(r):
        return 1.0
    x, w = gauss_legendre(64)
    s = 0.5 * t * (1 + x)
    return float((0.5 * t * np.sum(w * forcing.amplitude(s) ** r)) ** (1 / r))


# }}}
