"""Oracle checks of the mollifier commutator and adjoint identities."""
from typing import NamedTuple, Union

import numpy as np

from src.spectral.grid import PhysField2D, grid_sum
from src.spectral.mollifier import Mollifier, mollify_array


class IdentityCheck(NamedTuple):
    lhs: Union[np.ndarray, float]
    rhs: Union[np.ndarray, float]
    deviation: float


def _shift(values: np.ndarray, di1: int, di2: int) -> np.ndarray:
    """values(x - (di1, di2) dx)."""
    return np.roll(values, (di1, di2), axis=(0, 1))


def direct_mollify(values: np.ndarray, gamma: Mollifier, grid) -> np.ndarray:
    """f^eps by summation over the mollifier support."""
    gamma.check_grid(grid)
    out = np.zeros_like(values, dtype=float)
    for di1, di2, w in gamma.support_offsets(grid):
        out += w * _shift(values, di1, di2)
    return out


def mollifier_commutator_check(f: PhysField2D, g: PhysField2D, gamma: Mollifier) -> IdentityCheck:
    """
    (f g)^eps - f^eps g^eps against its double-integral representation

        int int (f(x - a) - f(x)) gamma(a) (g(x - a) - g(x - b)) gamma(b) da db

    The inner integral over b is g^eps(x) for every a; it is summed once
    over the support and reused.

    Returns:
        IdentityCheck with the two fields and their max-norm deviation
    """
    grid = f.grid
    fv, gv = f.values, g.values
    lhs = mollify_array(fv * gv, grid, gamma) - mollify_array(fv, grid, gamma) * mollify_array(gv, grid, gamma)

    g_eps = direct_mollify(gv, gamma, grid)
    rhs = np.zeros_like(fv)
    for di1, di2, w in gamma.support_offsets(grid):
        rhs += w * (_shift(fv, di1, di2) - fv) * (_shift(gv, di1, di2) - g_eps)
    return IdentityCheck(lhs, rhs, float(np.max(np.abs(lhs - rhs))))


def mollifier_adjoint_check(f: PhysField2D, g: PhysField2D, gamma: Mollifier) -> IdentityCheck:
    """int g (f^eps)^eps against int g^eps f^eps (symmetric mollifier)."""
    grid = f.grid
    area = grid.dx ** 2
    f_eps = mollify_array(f.values, grid, gamma)
    lhs = grid_sum(g.values * mollify_array(f_eps, grid, gamma)) * area
    rhs = grid_sum(mollify_array(g.values, grid, gamma) * f_eps) * area
    return IdentityCheck(lhs, rhs, abs(lhs - rhs))
