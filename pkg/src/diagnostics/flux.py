"""Mollified energy flux through scale eps."""
from typing import List, Sequence, Tuple

import numpy as np

from src.commutator.littlewood_paley import log_log_slope
from src.dynamics.state import SimState
from src.spectral.grid import grid_sum, to_coeffs, to_values
from src.spectral.mollifier import Mollifier, mollify_array
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


def onsager_flux(s: SimState, gamma: Mollifier, sweep=(0.0, 0.0)) -> float:
    """
    -2 int <(u (x) g)^eps - u^eps (x) g^eps, grad_h g^eps> over the slab.

    g = grad Psi = (dz, d1, d2) and u = (-d2 Psi, d1 Psi) + sweep, mollified
    in x only, level by level; the z integral uses the trapezoid rule.
    """
    slab = s.slab
    grid = slab.torus
    gamma.check_grid(grid)
    gz, g1, g2 = s.split.gradient
    ghat = gamma.transform(grid)

    per_level = np.zeros(slab.nz)
    for iz in range(slab.nz):
        g = (gz.values[iz], g1.values[iz], g2.values[iz])
        u = (-g[2] + sweep[0], g[1] + sweep[1])
        g_eps = [to_values(to_coeffs(gi) * ghat) for gi in g]
        u_eps = [mollify_array(ua, grid, gamma) for ua in u]
        total = 0.0
        for gi, gi_eps in zip(g, g_eps):
            gi_eps_c = to_coeffs(gi_eps)
            grad = (to_values(grid.ik1 * gi_eps_c), to_values(grid.ik2 * gi_eps_c))
            for ua, ua_eps, d_a in zip(u, u_eps, grad):
                commutator = mollify_array(ua * gi, grid, gamma) - ua_eps * gi_eps
                total += grid_sum(commutator * d_a)
        per_level[iz] = total * grid.dx ** 2
    flux = -2.0 * grid_sum(slab.z_weights * per_level)
    logger.debug(f"onsager_flux eps={gamma.eps:g}: {flux:.6e}")
    return flux


def flux_decay_slope(s: SimState, multiples: Sequence[float] = (2, 4, 8),
                     sweep=(0.0, 0.0)) -> Tuple[float, List[float]]:
    """
    Log-log slope of |flux| against eps = multiple * dx.

    Smooth data give slope 2 once every eps sits in the asymptotic window.

    Returns:
        (slope, fluxes)
    """
    dx = s.slab.torus.dx
    widths = [m * dx for m in multiples]
    fluxes = [onsager_flux(s, Mollifier(eps), sweep) for eps in widths]
    slope, _ = log_log_slope(widths, [abs(f) for f in fluxes])
    logger.info(f"flux decay slope {slope:.3f} over eps/dx = {list(multiples)}")
    return slope, fluxes
