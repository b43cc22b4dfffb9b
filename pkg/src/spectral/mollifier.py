"""Compactly supported radial mollifiers and horizontal convolution."""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from src.config import Config
from src.elliptic.slab import LayeredField3D
from src.exceptions import SpectralError
from src.spectral.grid import PhysField2D, TorusGrid, to_coeffs, to_values
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


def bump_profile(r: np.ndarray, eps: float) -> np.ndarray:
    """Unnormalized exp(-1/(1 - (r/eps)^2)) inside r < eps, 0 outside."""
    s = np.asarray(r, dtype=float) / eps
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


@lru_cache(maxsize=64)
def _weights(n: int, l: float, eps: float) -> np.ndarray:
    dx = l / n
    offsets = np.fft.fftfreq(n, d=1.0 / n) * dx
    d1, d2 = np.meshgrid(offsets, offsets, indexing='ij')
    w = bump_profile(np.hypot(d1, d2), eps)
    total = math.fsum(w.ravel().tolist())
    if total == 0.0:
        raise SpectralError(f"mollifier width eps={eps:g} resolves no grid offsets")
    w = w / total
    w.setflags(write=False)
    logger.debug(f"mollifier weights built: n={n}, eps={eps:g}, support={int(np.count_nonzero(w))} nodes")
    return w


@lru_cache(maxsize=64)
def _transform(n: int, l: float, eps: float) -> np.ndarray:
    ghat = sfft.fft2(_weights(n, l, eps), workers=Config.FFT_WORKERS).real
    ghat.setflags(write=False)
    return ghat


@dataclass(frozen=True)
class Mollifier:
    """
    Radial bump of width eps normalized to unit integral by grid quadrature.

    Discrete weights w satisfy sum(w) = 1, so the density is w / dx^2.
    """
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise SpectralError(f"mollifier width must be positive, got {self.eps}")

    def check_grid(self, grid: TorusGrid):
        if self.eps >= grid.l / 4:
            raise SpectralError(f"mollifier width eps={self.eps:g} must be < l/4 = {grid.l / 4:g}")

    def weights(self, grid: TorusGrid) -> np.ndarray:
        """Weights at minimum-image offsets, index (0, 0) is the centre."""
        return _weights(grid.n, grid.l, self.eps)

    def density(self, grid: TorusGrid) -> np.ndarray:
        return self.weights(grid) / grid.dx ** 2

    def transform(self, grid: TorusGrid) -> np.ndarray:
        """Multiplier g(k) of the discrete convolution; g(0) = 1, |g| <= 1."""
        return _transform(grid.n, grid.l, self.eps)

    def integral(self, grid: TorusGrid) -> float:
        return math.fsum(self.density(grid).ravel().tolist()) * grid.dx ** 2

    def support_offsets(self, grid: TorusGrid):
        """List of (di1, di2, weight) for every node inside the support."""
        w = self.weights(grid)
        n = grid.n
        out = []
        for i1, i2 in zip(*np.nonzero(w)):
            di1 = int(i1) if i1 <= n // 2 else int(i1) - n
            di2 = int(i2) if i2 <= n // 2 else int(i2) - n
            out.append((di1, di2, float(w[i1, i2])))
        return out


def mollify_array(values: np.ndarray, grid: TorusGrid, gamma: Mollifier) -> np.ndarray:
    """Convolve over the last two axes (x only)."""
    gamma.check_grid(grid)
    return to_values(to_coeffs(values) * gamma.transform(grid))


def mollify(f: PhysField2D, gamma: Mollifier) -> PhysField2D:
    """
    Horizontal convolution f * gamma_eps.

    Raises:
        SpectralError: if eps >= l/4
    """
    return PhysField2D(f.grid, mollify_array(f.values, f.grid, gamma))


def mollify_layers(field: LayeredField3D, gamma: Mollifier) -> LayeredField3D:
    """Mollify every level in x only, z by z."""
    return LayeredField3D(field.slab, mollify_array(field.values, field.torus, gamma))
