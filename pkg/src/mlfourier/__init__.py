"""Mittag-Leffler kernels, radial Fourier transforms and dispersive estimates."""

from __future__ import annotations

__version__ = "0.1.0"
