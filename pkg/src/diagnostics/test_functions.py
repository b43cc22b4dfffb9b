"""Smooth space-time test functions with closed-form derivatives."""
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.elliptic.slab import SlabGrid
from src.spectral.grid import SpectralField2D, TorusGrid

KINDS = ('interior', 'closure', 'surface')

# Horizontal profiles keep modes with max(|m1|, |m2|) <= this
MODE_LIMIT = 6


@dataclass(frozen=True)
class TestFunctionSpec:
    """
    phi(t, z, x) = a(t) p(z) b(x).

    b is a periodized Gaussian bump truncated to a few modes. p is
    sin^4(pi z/h) for 'interior' (vanishes with derivatives at both ends),
    cos^4(pi z/2h) exp(-z/h) for 'closure' (free at z = 0) and 1 for
    'surface'. a(t) = cos^2(pi t / 2T) vanishes with its derivative at T.
    """
    __test__ = False

    kind: str
    center: Tuple[float, float]
    width: float
    t_final: float
    height: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown test-function kind {self.kind!r}")
        if not self.width > 0 or not self.t_final > 0 or not self.height > 0:
            raise ValueError("width, t_final and height must be positive")

    def horizontal_coeffs(self, grid: TorusGrid) -> np.ndarray:
        """Fourier coefficients of the bump, exact for the periodized Gaussian."""
        w = self.width
        m1, m2 = grid.mode_numbers
        k2 = grid.kmag ** 2
        c1, c2 = self.center
        coeffs = (self.amplitude * 2 * math.pi * w ** 2 / grid.area
                  * np.exp(-0.5 * k2 * w ** 2) * np.exp(-1j * (grid.k1 * c1 + grid.k2 * c2)))
        keep = np.maximum(np.abs(m1), np.abs(m2)) <= MODE_LIMIT
        return np.where(keep, coeffs, 0.0)

    def horizontal(self, grid: TorusGrid) -> SpectralField2D:
        return SpectralField2D(grid, self.horizontal_coeffs(grid))

    def vertical(self, z) -> Tuple[np.ndarray, np.ndarray]:
        """(p(z), p'(z)); zero above the slab height."""
        z = np.asarray(z, dtype=float)
        h = self.height
        inside = (z >= 0) & (z <= h)
        if self.kind == 'interior':
            s, c = np.sin(np.pi * z / h), np.cos(np.pi * z / h)
            p, dp = s ** 4, 4 * s ** 3 * c * np.pi / h
        elif self.kind == 'closure':
            s, c = np.sin(np.pi * z / (2 * h)), np.cos(np.pi * z / (2 * h))
            decay = np.exp(-z / h)
            p = c ** 4 * decay
            dp = decay * (-4 * c ** 3 * s * np.pi / (2 * h) - c ** 4 / h)
        else:
            p, dp = np.ones_like(z), np.zeros_like(z)
        return np.where(inside, p, 0.0), np.where(inside, dp, 0.0)

    def temporal(self, t: float) -> Tuple[float, float]:
        """(a(t), a'(t))."""
        T = self.t_final
        if t >= T:
            return 0.0, 0.0
        return math.cos(math.pi * t / (2 * T)) ** 2, -(math.pi / (2 * T)) * math.sin(math.pi * t / T)


def test_function_suite(slab: SlabGrid, t_final: float, kind: str,
                        count: int = 8, seed: int = 0) -> List[TestFunctionSpec]:
    """Seeded family of bumps with random centres and widths in [l/12, l/6]."""
    rng = np.random.default_rng([seed, KINDS.index(kind)])
    l = slab.torus.l
    suite = []
    for _ in range(count):
        center = tuple(float(c) for c in rng.uniform(0, l, size=2))
        width = float(rng.uniform(l / 12, l / 6))
        suite.append(TestFunctionSpec(kind, center, width, t_final, slab.h))
    return suite


test_function_suite.__test__ = False
