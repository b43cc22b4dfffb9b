"""Calderón commutator and the two forms of the boundary nonlinear flux."""
from typing import Tuple

from src.exceptions import SpectralError
from src.harmonic.operators import lambda_pow, riesz
from src.spectral.grid import (
    PhysField2D, SpectralField2D, dealias, forward_transform, grid_sum, spectral_gradient,
)


def _require_zero_mean(theta: SpectralField2D):
    if not theta.has_zero_mean():
        raise SpectralError(
            f"commutator form needs zero-mean theta (mean coefficient {theta.coeffs[0, 0]:.3e})"
        )


def calderon_commutator(theta: SpectralField2D, phi: PhysField2D) -> Tuple[PhysField2D, PhysField2D]:
    """
    [Lambda, grad phi](Lambda^{-1} theta) = Lambda(d_a phi Lambda^{-1} theta) - d_a phi theta.

    Args:
        theta: Zero-mean boundary field
        phi: Smooth band-limited test function

    Returns:
        The two horizontal components, dealiased
    """
    _require_zero_mean(theta)
    g = lambda_pow(-1, theta).to_physical().values
    theta_values = theta.to_physical().values
    components = []
    for dphi in spectral_gradient(phi):
        product = forward_transform(PhysField2D(phi.grid, dphi.values * g))
        lifted = lambda_pow(1, product).coeffs
        direct = forward_transform(PhysField2D(phi.grid, dphi.values * theta_values)).coeffs
        components.append(dealias(theta.with_coeffs(lifted - direct)).to_physical())
    return components[0], components[1]


def _perp_velocity(theta: SpectralField2D):
    """Horizontal components of R-perp theta: (-R_2 theta, R_1 theta)."""
    return (-riesz(2, theta)).to_physical().values, riesz(1, theta).to_physical().values


def nonlinear_flux_commutator(theta: SpectralField2D, phi: PhysField2D) -> float:
    """1/2 int R-perp theta . [Lambda, grad phi](Lambda^{-1} theta)."""
    c1, c2 = calderon_commutator(theta, phi)
    r1, r2 = _perp_velocity(theta)
    return 0.5 * grid_sum(r1 * c1.values + r2 * c2.values) * theta.grid.dx ** 2


def nonlinear_flux_direct(theta: SpectralField2D, phi: PhysField2D) -> float:
    """int theta (R-perp theta . grad phi)."""
    _require_zero_mean(theta)
    r1, r2 = _perp_velocity(theta)
    d1, d2 = spectral_gradient(phi)
    values = theta.to_physical().values
    return grid_sum(values * (r1 * d1.values + r2 * d2.values)) * theta.grid.dx ** 2


def flux_mismatch(theta: SpectralField2D, phi: PhysField2D) -> float:
    """|direct + commutator| relative to |direct| + |commutator|."""
    direct = nonlinear_flux_direct(theta, phi)
    commutator = nonlinear_flux_commutator(theta, phi)
    return abs(direct + commutator) / (abs(direct) + abs(commutator) + 1e-30)

