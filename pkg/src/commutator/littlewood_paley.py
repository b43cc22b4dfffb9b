"""Sharp dyadic Littlewood-Paley bands and homogeneous Besov norms."""
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.exceptions import ExponentError
from src.spectral.grid import (
    PhysField2D, SpectralField2D, TorusGrid, apply_multiplier, grid_sum, lp_norm, to_values,
)
from src.spectral.mollifier import Mollifier


@dataclass(frozen=True)
class DyadicBand:
    """Modes with 2^j <= |m| < 2^(j+1), m the integer mode vector."""
    j: int

    def __post_init__(self):
        if self.j < 0:
            raise ValueError(f"band index must be >= 0 on the torus, got {self.j}")

    def mask(self, grid: TorusGrid) -> np.ndarray:
        m1, m2 = grid.mode_numbers
        m2sum = (m1 ** 2 + m2 ** 2).astype(np.int64)
        return (m2sum >= 4 ** self.j) & (m2sum < 4 ** (self.j + 1))


def dyadic_bands(grid: TorusGrid) -> List[DyadicBand]:
    """Bands covering every nonzero mode of the grid."""
    m1, m2 = grid.mode_numbers
    largest = int(np.max(m1 ** 2 + m2 ** 2))
    j_max = 0
    while 4 ** (j_max + 1) <= largest:
        j_max += 1
    return [DyadicBand(j) for j in range(j_max + 1)]


def lp_project(u: SpectralField2D, band: DyadicBand) -> SpectralField2D:
    return u.with_coeffs(np.where(band.mask(u.grid), u.coeffs, 0.0))


def band_energies(u: SpectralField2D) -> Dict[int, float]:
    """||Delta_j u||_{L2}^2 per band, by Parseval."""
    grid = u.grid
    power = np.abs(u.coeffs) ** 2
    return {band.j: grid.area * grid_sum(power[band.mask(grid)]) for band in dyadic_bands(grid)}


def band_norms(u: SpectralField2D, p: float = 3) -> Dict[int, float]:
    grid = u.grid
    return {
        band.j: lp_norm(PhysField2D(grid, to_values(np.where(band.mask(grid), u.coeffs, 0.0))), p)
        for band in dyadic_bands(grid)
    }


def _check_smoothness(alpha: float, p: float):
    if math.isinf(p) and alpha == 1:
        return
    if not 0 < alpha < 1:
        raise ExponentError(f"Besov smoothness alpha must lie in (0, 1) (or be 1 with p = inf), got {alpha}")


def besov_norm(u: SpectralField2D, alpha: float, p: float = 3) -> float:
    """max_j 2^(j alpha) ||Delta_j u||_{L^p} over the resolved bands."""
    _check_smoothness(alpha, p)
    norms = band_norms(u, p)
    return max((2.0 ** (j * alpha) * v for j, v in norms.items()), default=0.0)


def besov_contributions(u: SpectralField2D, alpha: float, p: float = 3) -> Dict[int, float]:
    _check_smoothness(alpha, p)
    return {j: 2.0 ** (j * alpha) * v for j, v in band_norms(u, p).items()}


def translate(u: SpectralField2D, y: Sequence[float]) -> SpectralField2D:
    """u(. - y) by a spectral phase shift."""
    y1, y2 = y
    return apply_multiplier(u, lambda k1, k2: np.exp(-1j * (k1 * y1 + k2 * y2)))


def translation_modulus(u: SpectralField2D, y: Sequence[float], p: float = 3) -> float:
    """||u(. - y) - u||_{L^p}."""
    return lp_norm((translate(u, y) - u).to_physical(), p)


def mollified_gradient_norm(u: SpectralField2D, gamma: Mollifier, p: float = 3) -> float:
    """||grad u^eps||_{L^p} with the Euclidean norm of the gradient pointwise."""
    grid = u.grid
    gamma.check_grid(grid)
    c = u.coeffs * gamma.transform(grid)
    g1, g2 = to_values(grid.ik1 * c), to_values(grid.ik2 * c)
    return lp_norm(PhysField2D(grid, np.hypot(g1, g2)), p)


def log_log_slope(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    """Least-squares (slope, intercept) of log y against log x."""
    slope, intercept = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope), float(intercept)


def lacunary_field(grid: TorusGrid, alpha: float) -> SpectralField2D:
    """
    sum_j 2^(-j alpha) cos(2^j k0 x1) over the octaves 2^j <= n/4, k0 = 2 pi / l.

    Every octave carries one mode, so the field sits in B^alpha_{p,inf}
    with band norms exactly 2^(-j alpha) times ||cos||_p.
    """
    _check_smoothness(alpha, 2)
    k0 = 2 * math.pi / grid.l
    octaves = int(math.log2(grid.n // 4))
    return SpectralField2D.from_function(
        grid, lambda x1, x2: sum(2.0 ** (-j * alpha) * np.cos(2 ** j * k0 * x1)
                                 for j in range(octaves + 1)))


def regularity_slopes(u: SpectralField2D, shifts: Sequence[float], widths: Sequence[float],
                      p: float = 2) -> Tuple[float, float]:
    """
    Log-log slopes of ||u(. - y) - u||_p against |y| (shifts along x1) and
    of ||grad u^eps||_p against eps.

    For u in B^alpha_{p,inf} these approach alpha and alpha - 1.
    """
    moduli = [translation_modulus(u, (y, 0.0), p) for y in shifts]
    gradients = [mollified_gradient_norm(u, Mollifier(eps), p) for eps in widths]
    return log_log_slope(shifts, moduli)[0], log_log_slope(widths, gradients)[0]
