"""Energy, Hamiltonian and L^p dissipation functionals."""
import numpy as np

from src.dynamics.state import SimState
from src.elliptic.slab import z_derivative
from src.elliptic.solvers import psi1_coeffs, psi1_dz_coeffs
from src.exceptions import SpectralError
from src.harmonic.operators import lambda_pow
from src.spectral.grid import SpectralField2D, grid_sum


def hamiltonian(theta: SpectralField2D) -> float:
    """||theta||^2 in H^{-1/2}: l^2 sum |theta(k)|^2 / |k|."""
    if not theta.has_zero_mean():
        raise SpectralError("hamiltonian needs zero-mean theta")
    grid = theta.grid
    return grid.area * grid_sum(np.abs(theta.coeffs) ** 2 * grid.inv_kmag)


def _level_inner(k2, a, b, da, db) -> np.ndarray:
    """Per-level l^-2 int grad a . grad b dx from coefficients."""
    return np.array([
        grid_sum(k2 * (ai * np.conj(bi)).real + (dai * np.conj(dbi)).real)
        for ai, bi, dai, dbi in zip(a, b, da, db)
    ])


def energy(s: SimState) -> float:
    """
    ||grad Psi||^2 over the half-space.

    The harmonic part is integrated exactly to z = infinity. Terms with
    psi2 use the trapezoid rule on the slab plus the closed-form
    exp(-|k|(z - h)) tail above it for k != 0.
    """
    theta = s.theta
    total = hamiltonian(theta)
    omega_c = s.omega.coeffs
    if not np.any(omega_c):
        return total

    slab = s.slab
    grid = slab.torus
    area = grid.area
    kmag = grid.kmag
    k2 = kmag ** 2
    levels = slab.levels

    c1 = psi1_coeffs(theta, levels)
    d1 = psi1_dz_coeffs(theta, levels)
    c2 = s.split.psi2.coeffs
    d2 = z_derivative(slab, c2)

    cross = area * grid_sum(slab.z_weights * _level_inner(k2, c1, c2, d1, d2))
    self22 = area * grid_sum(slab.z_weights * _level_inner(k2, c2, c2, d2, d2))
    top1, top2 = c1[-1], c2[-1]
    cross += area * grid_sum(kmag * (top1 * np.conj(top2)).real)
    self22 += area * grid_sum(kmag * np.abs(top2) ** 2)
    return total + 2 * cross + self22


def lp_dissipation_integral(theta: SpectralField2D, p: float, s: float = 1.0) -> float:
    """int theta |theta|^{p-2} Lambda^s theta; nonnegative for 0 < s <= 2, p >= 1."""
    values = theta.to_physical().values
    lifted = lambda_pow(s, theta).to_physical().values
    weight = np.sign(values) * np.abs(values) ** (p - 1)
    return grid_sum(weight * lifted) * theta.grid.dx ** 2
