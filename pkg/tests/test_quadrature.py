from __future__ import annotations

import numpy as np
import pytest
from scipy.special import beta as beta_fn

from mlfourier.quadrature import aitken, composite_gauss_legendre, gauss_gegenbauer, gauss_jacobi


@pytest.mark.parametrize("lam", [0.0, 1e-15, 1e-12, 0.3, 1.0, 3.5])
def test_gegenbauer_moments(lam):
    x, w = gauss_gegenbauer(40, lam)
    for m in (0, 2, 10, 40):
        exact = beta_fn((m + 1) / 2, lam + 0.5)
        assert np.sum(w * x**m) == pytest.approx(exact, rel=1e-13)


def test_gegenbauer_chebyshev_limit():
    n = 48
    x, w = gauss_gegenbauer(n, 0.0)
    cheb = np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n))
    assert np.max(np.abs(np.sort(x) - np.sort(cheb))) < 1e-14
    assert np.allclose(w, np.pi / n, rtol=1e-13)


def test_gegenbauer_matches_jacobi_away_from_zero():
    x, w = gauss_gegenbauer(30, 1.7)
    xj, wj = gauss_jacobi(30, 1.2, 1.2)
    assert np.max(np.abs(np.sort(x) - np.sort(xj))) < 1e-13
    assert np.allclose(np.sort(w), np.sort(wj), rtol=1e-12)


def test_composite_rule():
    x, w = composite_gauss_legendre(np.array([0.0, 1.0, 3.0]), 8)
    assert np.sum(w * x**5) == pytest.approx(3**6 / 6, rel=1e-14)


def test_aitken_geometric():
    s = np.cumsum(0.5 ** np.arange(6))
    assert aitken(s)[-1] == pytest.approx(2.0, rel=1e-14)
    assert aitken(np.ones(5))[-1] == 1.0
