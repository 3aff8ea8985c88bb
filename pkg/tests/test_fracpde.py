from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta as beta_fn

from mlfourier.errors import ConfigurationError, ContourUnavailable, DomainTooSmall, UnsupportedOrderError
from mlfourier.fracpde import (
    FieldProfile,
    ForcingProfile,
    Grid,
    ProblemSpec,
    ResolutionWarning,
    SpectralField,
    caputo_l1,
    caputo_order_study,
    caputo_residual,
    check_box,
    duhamel_constant_forcing,
    duhamel_quadrature,
    graded_duhamel_quadrature,
    homogeneous_snapshots,
    kernel_V,
    laplace_identity_residual,
    multiplier_array,
    sample,
    solution_multiplier,
    solve_homogeneous,
    solve_inhomogeneous,
    verify_dispersive,
    verify_inhomogeneous_decay,
    wrap_phase,
)

E_HALF_MINUS_ONE = 0.42758357615580700442
HEAT = ProblemSpec(1.0, 2.0, 0.0, 1.0, FieldProfile("gaussian", 1.0))


def forced(alpha: float, sigma: float = 1.0, amplitude: float = 1.0) -> ProblemSpec:
    g = FieldProfile("gaussian", sigma, amplitude)
    return ProblemSpec(alpha, 2.0, 0.0, 1.0, None, ForcingProfile(g))


class TestSpec:
    def test_wrap(self):
        assert wrap_phase(1.5) == -0.5
        assert wrap_phase(-1.0) == 1.0
        assert wrap_phase(1.0) == 1.0

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            ProblemSpec(2.0, 1.0, 0.0, 1.0)
        with pytest.raises(ConfigurationError):
            ProblemSpec(0.5, 1.0, -1.0, 1.0)
        with pytest.raises(ConfigurationError):
            Grid(1, 100, 1.0)

    def test_effective_ray(self):
        spec = ProblemSpec(0.5, 2.0, -0.5, 1.0)
        assert spec.s_eff == -0.5 and spec.decays
        with pytest.raises(ConfigurationError, match="non-decay sector"):
            ProblemSpec(0.5, 2.0, 0.9, 1.0).require_decay()


class TestMultiplier:
    def test_heat(self):
        for t, xi in [(0.5, 1.0), (2.0, 0.3)]:
            assert solution_multiplier(HEAT, t, xi).real == pytest.approx(math.exp(-t * xi**2), rel=1e-12)

    def test_initial_time(self):
        assert solution_multiplier(ProblemSpec(0.5, 2, 0, 1), 0.0, 3.0) == 1.0

    def test_half_order(self):
        assert solution_multiplier(ProblemSpec(0.5, 2, 0, 1), 1.0, 1.0).real == pytest.approx(
            E_HALF_MINUS_ONE, rel=1e-12)

    def test_non_decay_beyond_series(self):
        spec = ProblemSpec(0.5, 2.0, 0.0, 0.1)
        multiplier_array(spec, 1.0, np.array([0.5, 1.0]))
        with pytest.raises(ContourUnavailable, match="contour unavailable"):
            multiplier_array(spec, 1.0, np.array([5.0]))

    @settings(max_examples=30, deadline=None)
    @given(alpha=st.floats(0.2, 1.8), s_frac=st.floats(0.1, 1.0), x=st.floats(0, 1e6))
    def test_decay_bound_property(self, alpha, s_frac, x):
        s = alpha / 2 + s_frac * (1 - alpha / 2)
        spec = ProblemSpec(alpha, 1.0, 0.0, s)
        values = multiplier_array(spec, 1.0, np.array([x, 0.0]))
        assert abs(values[0]) * (1 + x) <= 4.0 / min(1.0, abs(math.sin(math.pi * (s - alpha / 2))))


class TestHomogeneous:
    def test_initial_recovery(self):
        grid = Grid(1, 512, 32.0)
        f = sample(HEAT.initial, grid)
        u = solve_homogeneous(HEAT, 0.0, grid)
        assert np.max(np.abs(u.values - f.values)) < 1e-12 * np.max(np.abs(f.values))

    def test_heat_width_law(self):
        grid = Grid(1, 1024, 64.0)
        for t in (0.5, 3.0, 10.0):
            u = solve_homogeneous(HEAT, t, grid)
            s2 = 1.0 + t / (2 * math.pi**2)
            exact = np.exp(-grid.axis() ** 2 / (2 * s2)) / math.sqrt(s2)
            assert np.max(np.abs(u.values - exact)) < 1e-8

    def test_two_dimensional_heat(self):
        grid = Grid(2, 128, 24.0)
        u = solve_homogeneous(HEAT, 2.0, grid)
        s2 = 1.0 + 2.0 / (2 * math.pi**2)
        x, y = grid.coords()
        exact = np.exp(-(x**2 + y**2) / (2 * s2)) / s2
        assert np.max(np.abs(u.values - exact)) < 1e-8

    def test_resolution_warning(self):
        with pytest.warns(ResolutionWarning):
            solve_homogeneous(ProblemSpec(1.0, 2.0, 0, 1, FieldProfile("gaussian", 0.05)), 1e-4, Grid(1, 64, 8.0))

    def test_box_guard(self):
        u = solve_homogeneous(HEAT, 1.0, Grid(1, 256, 8.0))
        with pytest.raises(DomainTooSmall, match="domain too small"):
            check_box(u)


class TestSerialization:
    def test_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        field = SpectralField(2, 8, 3.5, rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
        field.to_csv(tmp_path / "f.csv")
        back = SpectralField.from_csv(tmp_path / "f.csv", 3.5)
        assert np.array_equal(back.values, field.values)
        assert (tmp_path / "f.csv").read_text().splitlines()[0] == "i0,i1,re,im"

    def test_binary_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        field = SpectralField(1, 16, 2.0, rng.normal(size=16) + 1j * rng.normal(size=16))
        field.to_binary(tmp_path / "f.bin")
        raw = (tmp_path / "f.bin").read_bytes()
        assert raw[:4] == b"MLF1" and len(raw) == 20 + 16 * 16
        back = SpectralField.from_binary(tmp_path / "f.bin")
        assert np.array_equal(back.values, field.values) and back.L == 2.0

    def test_bad_magic(self):
        with pytest.raises(ConfigurationError):
            SpectralField.from_bytes(b"XXXX" + bytes(16))


class TestKernels:
    def test_heat_kernel(self):
        for t, x in [(1.0, 0.3), (0.5, 0.0001), (2.0, 1.0)]:
            exact = math.sqrt(math.pi / t) * math.exp(-math.pi**2 * x**2 / t)
            assert kernel_V(HEAT, t, x).real == pytest.approx(exact, rel=1e-8)

    def test_scaling(self):
        spec = ProblemSpec(0.5, 2.0, 0.0, 1.0)
        y = np.array([0.3, 1.0, 2.5])
        scaled = [[t ** (0.25) * kernel_V(spec, t, t**0.25 * yy) for yy in y] for t in (0.25, 1.0, 4.0)]
        scaled = np.array(scaled)
        assert np.max(np.abs(scaled - scaled[1])) <= 1e-6 * np.max(np.abs(scaled[1]))

    def test_vanishes_as_t_to_zero(self):
        spec = ProblemSpec(0.5, 2.0, 0.0, 1.0)
        vals = [abs(kernel_V(spec, t, 1.0)) for t in (1e-1, 1e-2, 1e-3)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 0.1 * vals[0]


class TestDuhamelQuadrature:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.7])
    def test_moment(self, alpha):
        q = duhamel_quadrature(alpha, 2.0, 8)
        assert np.sum(q.weights) == pytest.approx(2.0**alpha / alpha, rel=1e-12)
        assert np.all(q.weights > 0)

    def test_beta_function(self):
        q = duhamel_quadrature(0.5, 1.0, 8)
        assert np.sum(q.weights * q.nodes) == pytest.approx(4 / 3, rel=1e-12)
        assert 4 / 3 == pytest.approx(beta_fn(2, 0.5))

    def test_graded_moments(self):
        q = graded_duhamel_quadrature(0.5, 10.0, 16, 1e-4)
        assert np.sum(q.weights) == pytest.approx(10.0**0.5 / 0.5, rel=1e-12)
        assert np.sum(q.weights * q.nodes**2) == pytest.approx(10**2.5 * beta_fn(3, 0.5), rel=1e-12)
        assert np.all(q.weights > 0) and np.all((q.nodes >= 0) & (q.nodes <= 10))

    def test_domain(self):
        with pytest.raises(ConfigurationError):
            duhamel_quadrature(0.5, 0.0, 4)


class TestInhomogeneous:
    @pytest.mark.parametrize("alpha,tol", [(1.0, 1e-12), (0.5, 1e-9)])
    def test_against_closed_form(self, alpha, tol):
        spec, grid = forced(alpha), Grid(1, 1024, 128.0)
        w = solve_inhomogeneous(spec, 5.0, grid, 16)
        ghat = np.fft.fft(spec.forcing.spatial(grid.coords()))
        exact = np.fft.ifft(duhamel_constant_forcing(spec, 5.0, grid.frequency_modulus()) * ghat)
        assert np.max(np.abs(w.values - exact)) <= tol * np.max(np.abs(exact))

    def test_classical_heat(self):
        # constant forcing: exponential integrator (1 - exp(-t xi^2)) / xi^2 is exact
        spec, grid, t = forced(1.0), Grid(1, 1024, 128.0), 3.0
        w = solve_inhomogeneous(spec, t, grid, 16)
        xi2 = grid.frequency_modulus() ** 2
        factor = np.where(xi2 > 0, -np.expm1(-t * xi2) / np.where(xi2 > 0, xi2, 1), t)
        exact = np.fft.ifft(factor * np.fft.fft(spec.forcing.spatial(grid.coords())))
        assert np.max(np.abs(w.values - exact)) <= 1e-6 * np.max(np.abs(exact))

    def test_refinement(self):
        spec, grid = forced(0.5), Grid(1, 512, 64.0)
        a = solve_inhomogeneous(spec, 2.0, grid, 16).values
        b = solve_inhomogeneous(spec, 2.0, grid, 32).values
        assert np.linalg.norm(a - b) <= 1e-8 * np.linalg.norm(b)

    def test_zero_forcing(self):
        w = solve_inhomogeneous(forced(0.5, amplitude=0.0), 1.0, Grid(1, 64, 16.0))
        assert np.all(w.values == 0)

    def test_small_time(self):
        spec, grid = forced(0.5), Grid(1, 512, 64.0)
        g = sample(spec.forcing.spatial, grid).norm(math.inf)
        for t in (1e-4, 1e-6):
            w = solve_inhomogeneous(spec, t, grid).norm(math.inf)
            assert w == pytest.approx(t**0.5 / math.gamma(1.5) * g, rel=1e-2)

    def test_missing_forcing(self):
        with pytest.raises(ConfigurationError):
            solve_inhomogeneous(HEAT, 1.0, Grid(1, 64, 16.0))


class TestCaputo:
    def test_constant(self):
        u = np.ones((65, 3))
        assert np.all(caputo_l1(u, 0.1, 0.5) == 0)

    def test_linear(self):
        t = np.linspace(0, 2, 129)
        d = caputo_l1(t[:, None], t[1] - t[0], 0.5)
        assert d[0] == pytest.approx(2 * math.sqrt(2 / math.pi), rel=1e-12)

    def test_order(self):
        spec = ProblemSpec(0.5, 2.0, 0.0, 1.0)
        res, orders = caputo_order_study(spec, 1.0, [64, 128, 256, 512], np.array([0.5, 1.0, 2.0]))
        assert res[-1] < 1e-3
        assert np.all(np.abs(orders - 1.5) <= 0.2)

    def test_guards(self):
        times, snaps = homogeneous_snapshots(ProblemSpec(0.5, 2, 0, 1), 1.0, 32, np.array([1.0]))
        with pytest.raises(ConfigurationError):
            caputo_residual(ProblemSpec(0.5, 2, 0, 1), times, snaps, np.array([1.0]))
        times, snaps = homogeneous_snapshots(HEAT, 1.0, 64, np.array([1.0]))
        with pytest.raises(UnsupportedOrderError):
            caputo_residual(HEAT, times, snaps, np.array([1.0]))

    @pytest.mark.parametrize("alpha", [0.5, 1.3, 1.8])
    def test_laplace_identity(self, alpha):
        assert laplace_identity_residual(alpha, 1.0, 1.0, [0.5, 1.0, 3.0]) < 1e-8


class TestDecay:
    def test_heat_dispersive(self):
        spec = ProblemSpec(1.0, 2.0, 0.0, 1.0, FieldProfile("gaussian", 0.25))
        rep = verify_dispersive(spec, 1, math.inf, np.geomspace(1e2, 1e4, 7), Grid(1, 8192, 512.0))
        assert rep.expected == -0.5
        assert rep.slope == pytest.approx(-0.5, abs=0.02)
        assert np.all(rep.bounds >= rep.norms * (1 - 1e-12))

    def test_hypotheses(self):
        grid = Grid(1, 64, 16.0)
        with pytest.raises(ConfigurationError):
            verify_dispersive(HEAT, 2, 1, [1, 2], grid)
        with pytest.raises(ConfigurationError, match="hypothesis violated"):
            verify_dispersive(ProblemSpec(1, 0.5, 0, 1, HEAT.initial), 1, math.inf, [1, 2], grid)

    def test_domain_guard(self):
        with pytest.raises(DomainTooSmall):
            verify_dispersive(HEAT, 1, math.inf, [10.0, 100.0], Grid(1, 256, 16.0))

    def test_heat_inhomogeneous(self):
        spec = forced(1.0, sigma=0.1)
        rep = verify_inhomogeneous_decay(spec, 1, math.inf, math.inf, np.geomspace(10, 1000, 7),
                                         Grid(1, 32768, 1024.0))
        assert rep.expected == 0.5
        assert rep.slope <= rep.expected + 0.05

    def test_quadrature_and_closed_form_agree(self):
        spec = forced(0.5)
        times = np.geomspace(1.0, 10.0, 4)
        grid = Grid(1, 1024, 256.0)
        a = verify_inhomogeneous_decay(spec, 1, math.inf, math.inf, times, grid, method="closed_form")
        b = verify_inhomogeneous_decay(spec, 1, math.inf, math.inf, times, grid, method="quadrature")
        assert abs(a.slope - b.slope) < 0.05
        np.testing.assert_allclose(a.norms, b.norms, rtol=1e-8)

    def test_closed_form_requires_constant_forcing(self):
        g = FieldProfile("gaussian", 1.0)
        spec = ProblemSpec(0.5, 2.0, 0, 1, None, ForcingProfile(g, "power", 0.5))
        with pytest.raises(ConfigurationError):
            verify_inhomogeneous_decay(spec, 1, math.inf, math.inf, [1, 2], Grid(1, 64, 64.0),
                                       method="closed_form")

    def test_inhomogeneous_hypotheses(self):
        with pytest.raises(ConfigurationError):
            verify_inhomogeneous_decay(forced(0.5), 1, math.inf, 1.5, [1, 2], Grid(1, 64, 64.0))
