"""Truncation and mollification of raw initial data."""
from typing import NamedTuple

import numpy as np

from src.elliptic.slab import LayeredField3D
from src.exceptions import SpectralError
from src.spectral.grid import SpectralField2D, forward_transform, PhysField2D
from src.spectral.mollifier import Mollifier, mollify_array
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


class PreparedData(NamedTuple):
    omega: LayeredField3D
    theta: SpectralField2D


def _distance_from_center(grid, z=None):
    x1, x2 = grid.coordinates
    c1, c2 = grid.center
    r2 = (x1 - c1) ** 2 + (x2 - c2) ** 2
    if z is not None:
        r2 = r2[None] + z[:, None, None] ** 2
    return np.sqrt(r2)


def truncation_mask(values: np.ndarray, distance: np.ndarray, eps: float) -> np.ndarray:
    """True where |v| < 1/eps and the node lies inside the ball of radius 1/eps."""
    bound = 1.0 / eps
    return (np.abs(values) < bound) & (distance < bound)


def prepare_data(omega_raw: LayeredField3D, theta_raw: SpectralField2D, eps: float) -> PreparedData:
    """
    Zero the data where it is large or far away, then mollify with width
    min(eps, l/8); the truncation itself always uses 1/eps.

    The ball is centred at the boundary point above the middle of the
    periodic box; ω uses the 3-D distance, θ the horizontal one. Values
    are set to zero (not clamped) and mollification acts in x only.

    Args:
        omega_raw: Interior vorticity on the slab
        theta_raw: Boundary data
        eps: Truncation parameter and mollifier width, any eps > 0

    Returns:
        PreparedData(omega, theta); theta keeps whatever mean the truncation leaves
    """
    if not eps > 0:
        raise SpectralError(f"prepare_data needs eps > 0, got {eps}")
    slab = omega_raw.slab
    grid = slab.torus
    width = min(eps, grid.l / 8)
    if width < eps:
        logger.warning(f"prepare_data: mollifier width {eps:g} exceeds l/8, using {width:g}")
    gamma = Mollifier(width)

    omega = np.asarray(omega_raw.values)
    omega_mask = truncation_mask(omega, _distance_from_center(grid, slab.levels), eps)
    omega_cut = np.where(omega_mask, omega, 0.0)

    theta = theta_raw.to_physical().values
    theta_mask = truncation_mask(theta, _distance_from_center(grid), eps)
    theta_cut = np.where(theta_mask, theta, 0.0)

    dropped = int(omega_mask.size - np.count_nonzero(omega_mask))
    if dropped:
        logger.debug(f"prepare_data zeroed {dropped} interior nodes (eps={eps:g})")

    return PreparedData(
        omega=LayeredField3D(slab, mollify_array(omega_cut, grid, gamma)),
        theta=forward_transform(PhysField2D(grid, mollify_array(theta_cut, grid, gamma))),
    )
