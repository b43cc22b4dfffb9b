"""Riesz transforms, fractional Laplacians, Poisson extension and the DtN map."""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from src.exceptions import OperatorError, SpectralError
from src.spectral.grid import SpectralField2D, apply_multiplier, homogeneous_sobolev_norm

__all__ = [
    'OperatorKind', 'OperatorTag', 'riesz', 'riesz_perp', 'lambda_pow',
    'poisson_extend', 'dirichlet_to_neumann', 'neumann_trace_fd',
    'apply_operator', 'homogeneous_sobolev_norm',
]


class OperatorKind(Enum):
    RIESZ1 = 'riesz1'
    RIESZ2 = 'riesz2'
    RIESZ_PERP = 'riesz_perp'
    LAMBDA_POW = 'lambda_pow'
    POISSON_EXTEND = 'poisson_extend'
    DTN = 'dtn'


@dataclass(frozen=True)
class OperatorTag:
    """An operator of the stack with its parameter (s or z) when it has one."""
    kind: OperatorKind
    param: Optional[float] = None

    def __post_init__(self):
        if self.kind in (OperatorKind.LAMBDA_POW, OperatorKind.POISSON_EXTEND):
            if self.param is None:
                raise OperatorError(f"{self.kind.value} needs a parameter")
        elif self.param is not None:
            raise OperatorError(f"{self.kind.value} takes no parameter")
        if self.kind is OperatorKind.POISSON_EXTEND and self.param < 0:
            raise OperatorError(f"Poisson extension height must be >= 0, got {self.param}")

    @classmethod
    def lambda_pow(cls, s: float) -> 'OperatorTag':
        return cls(OperatorKind.LAMBDA_POW, float(s))

    @classmethod
    def poisson(cls, z: float) -> 'OperatorTag':
        return cls(OperatorKind.POISSON_EXTEND, float(z))


def _require_zero_mean(theta: SpectralField2D, what: str):
    if not theta.has_zero_mean():
        raise SpectralError(f"{what} needs zero-mean input (mean coefficient {theta.coeffs[0, 0]:.3e})")


def riesz(j: int, theta: SpectralField2D) -> SpectralField2D:
    """R_j with symbol -i k_j/|k|; the mean mode maps to 0."""
    if j not in (1, 2):
        raise OperatorError(f"Riesz index must be 1 or 2, got {j}")
    grid = theta.grid
    ik = grid.ik1 if j == 1 else grid.ik2
    return apply_multiplier(theta, -ik * grid.inv_kmag, homogeneous=True)


def riesz_perp(theta: SpectralField2D) -> Tuple[SpectralField2D, SpectralField2D, SpectralField2D]:
    """(0, -R_2 theta, R_1 theta) in (z, x1, x2) component order."""
    return (SpectralField2D.zeros(theta.grid), -riesz(2, theta), riesz(1, theta))


def lambda_pow(s: float, theta: SpectralField2D) -> SpectralField2D:
    """
    Multiplier |k|^s.

    s = 0 is the identity (mean kept). For s > 0 the mean maps to 0; for
    s < 0 a nonzero mean is rejected.
    """
    if s == 0:
        return theta
    if s < 0:
        _require_zero_mean(theta, f"lambda_pow(s={s:g})")
    grid = theta.grid
    symbol = np.zeros(grid.shape)
    nonzero = grid.kmag > 0
    symbol[nonzero] = grid.kmag[nonzero] ** s
    return apply_multiplier(theta, symbol, homogeneous=True)


def poisson_extend(theta: SpectralField2D, z: float) -> SpectralField2D:
    """Harmonic extension to height z: multiplier exp(-z|k|)."""
    if z < 0:
        raise OperatorError(f"Poisson extension height must be >= 0, got {z}")
    _require_zero_mean(theta, "poisson_extend")
    return apply_multiplier(theta, np.exp(-z * theta.grid.kmag), homogeneous=True)


def dirichlet_to_neumann(psi_surface: SpectralField2D) -> SpectralField2D:
    _require_zero_mean(psi_surface, "dirichlet_to_neumann")
    return lambda_pow(1, psi_surface)


def neumann_trace_fd(psi_surface: SpectralField2D, dz: float) -> SpectralField2D:
    """-d/dz at z = 0 of the Poisson extension by the one-sided three-point stencil."""
    p0 = poisson_extend(psi_surface, 0.0).coeffs
    p1 = poisson_extend(psi_surface, dz).coeffs
    p2 = poisson_extend(psi_surface, 2 * dz).coeffs
    return psi_surface.with_coeffs(-(-3 * p0 + 4 * p1 - p2) / (2 * dz))


def apply_operator(tag: OperatorTag, theta: SpectralField2D):
    """Dispatch an OperatorTag; RIESZ_PERP returns the component triple."""
    if tag.kind is OperatorKind.RIESZ1:
        return riesz(1, theta)
    if tag.kind is OperatorKind.RIESZ2:
        return riesz(2, theta)
    if tag.kind is OperatorKind.RIESZ_PERP:
        return riesz_perp(theta)
    if tag.kind is OperatorKind.LAMBDA_POW:
        return lambda_pow(tag.param, theta)
    if tag.kind is OperatorKind.POISSON_EXTEND:
        return poisson_extend(theta, tag.param)
    return dirichlet_to_neumann(theta)
