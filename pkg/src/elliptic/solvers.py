"""Per-mode solvers for the harmonic/interior split of the stream function."""
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from src.elliptic.exponents import trace_exponent
from src.elliptic.slab import (
    LayeredField3D, SlabGrid, z_derivative, z_second_derivative,
)
from src.elliptic.tridiagonal import factor_tridiag, solve_tridiag
from src.exceptions import SpectralError
from src.spectral.grid import PhysField2D, SpectralField2D, to_coeffs, to_values
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

Gradient = Tuple[LayeredField3D, LayeredField3D, LayeredField3D]


def psi1_coeffs(theta: SpectralField2D, z: np.ndarray) -> np.ndarray:
    """theta(k) exp(-|k| z) / |k| at every height in z, k = 0 mapped to 0."""
    grid = theta.grid
    z = np.asarray(z, dtype=float)[:, None, None]
    return theta.coeffs[None] * np.exp(-grid.kmag[None] * z) * grid.inv_kmag[None]


def psi1_dz_coeffs(theta: SpectralField2D, z: np.ndarray) -> np.ndarray:
    """Exact d/dz of psi1_coeffs: -theta(k) exp(-|k| z)."""
    grid = theta.grid
    z = np.asarray(z, dtype=float)[:, None, None]
    out = -theta.coeffs[None] * np.exp(-grid.kmag[None] * z)
    out[:, 0, 0] = 0.0
    return out


def _require_zero_mean(theta: SpectralField2D):
    if not theta.has_zero_mean():
        raise SpectralError(
            f"boundary data must have zero mean (mean coefficient {theta.coeffs[0, 0]:.3e})"
        )


def solve_psi1(theta: SpectralField2D, slab: SlabGrid) -> LayeredField3D:
    """Harmonic extension with Neumann data theta, exact per mode."""
    _require_zero_mean(theta)
    return LayeredField3D.from_coeffs(slab, psi1_coeffs(theta, slab.levels))


class Psi2Solver:
    """
    Factorized vertical operators for (d2/dz2 - |k|^2) psi = omega.

    Ghost-point Neumann row at z = 0, radiation row d/dz = -|k| at the
    top; the k = 0 mode is integrated directly.
    """

    def __init__(self, slab: SlabGrid):
        self.slab = slab
        nz, dz = slab.nz, slab.dz
        kappa = slab.torus.kmag.ravel()
        self.nonzero = kappa > 0
        kap = kappa[self.nonzero][None, :]
        m = kap.shape[1]
        inv = 1.0 / dz ** 2

        a = np.full((nz - 1, m), inv)
        c = np.full((nz - 1, m), inv)
        b = np.broadcast_to(-2 * inv - kap ** 2, (nz, m)).copy()
        c[0] = 2 * inv
        a[-1] = 2 * inv
        b[-1] = -(2 + 2 * kap[0] * dz) * inv - kap[0] ** 2
        self.factor = factor_tridiag(a, b, c)
        logger.debug(f"Psi2Solver factorized {m} modes x {nz} levels")

    def solve_mean_mode(self, omega0: np.ndarray) -> np.ndarray:
        """psi'' = omega0, psi'(0) = 0 (so psi'(h) = int omega0), zero vertical mean."""
        z = self.slab.levels
        dpsi = cumulative_trapezoid(omega0, z, initial=0.0)
        psi = cumulative_trapezoid(dpsi, z, initial=0.0)
        mean = np.sum(self.slab.z_weights * psi) / self.slab.h
        return psi - mean

    def solve_coeffs(self, omega_coeffs: np.ndarray) -> np.ndarray:
        nz = self.slab.nz
        shape = omega_coeffs.shape
        f = np.asarray(omega_coeffs).reshape(nz, -1)
        out = np.zeros_like(f, dtype=complex)
        out[:, self.nonzero] = solve_tridiag(self.factor, f[:, self.nonzero])
        out[:, ~self.nonzero] = self.solve_mean_mode(f[:, ~self.nonzero][:, 0])[:, None]
        return out.reshape(shape)


@lru_cache(maxsize=8)
def get_psi2_solver(slab: SlabGrid) -> Psi2Solver:
    return Psi2Solver(slab)


def solve_psi2(omega: LayeredField3D) -> LayeredField3D:
    """Interior solve with homogeneous Neumann data at z = 0."""
    solver = get_psi2_solver(omega.slab)
    return LayeredField3D.from_coeffs(omega.slab, solver.solve_coeffs(omega.coeffs))


def horizontal_derivatives(field: LayeredField3D) -> Tuple[LayeredField3D, LayeredField3D]:
    grid = field.torus
    c = field.coeffs
    return (LayeredField3D.from_coeffs(field.slab, grid.ik1 * c),
            LayeredField3D.from_coeffs(field.slab, grid.ik2 * c))


def gradient(psi: LayeredField3D) -> Gradient:
    """(d/dz, d/dx1, d/dx2): spectral in x, second-order differences in z."""
    d1, d2 = horizontal_derivatives(psi)
    dz = LayeredField3D(psi.slab, z_derivative(psi.slab, psi.values))
    return dz, d1, d2


def laplacian(psi: LayeredField3D) -> LayeredField3D:
    slab = psi.slab
    c = psi.coeffs
    lap = z_second_derivative(slab, c) - slab.torus.kmag ** 2 * c
    return LayeredField3D.from_coeffs(slab, lap)


def boundary_trace(f: LayeredField3D) -> PhysField2D:
    return f.layer(0)


@dataclass(frozen=True, eq=False)
class EllipticSplit:
    """Psi = psi1 + psi2 with psi1 harmonic and psi2 carrying the interior vorticity."""
    theta: SpectralField2D
    psi1: LayeredField3D
    psi2: LayeredField3D

    @property
    def slab(self) -> SlabGrid:
        return self.psi1.slab

    @cached_property
    def psi(self) -> LayeredField3D:
        return self.psi1 + self.psi2

    @cached_property
    def psi_coeffs(self) -> np.ndarray:
        return psi1_coeffs(self.theta, self.slab.levels) + self.psi2.coeffs

    @cached_property
    def dz_coeffs(self) -> np.ndarray:
        """Exact d/dz of psi1 plus finite-difference d/dz of psi2."""
        return psi1_dz_coeffs(self.theta, self.slab.levels) + z_derivative(self.slab, self.psi2.coeffs)

    @cached_property
    def gradient(self) -> Gradient:
        slab, grid = self.slab, self.slab.torus
        c = self.psi_coeffs
        return (LayeredField3D.from_coeffs(slab, self.dz_coeffs),
                LayeredField3D.from_coeffs(slab, grid.ik1 * c),
                LayeredField3D.from_coeffs(slab, grid.ik2 * c))

    @cached_property
    def horizontal_velocity(self) -> Tuple[np.ndarray, np.ndarray]:
        """(-d2 Psi, d1 Psi) on every level as [iz, i1, i2] arrays."""
        _, d1, d2 = self.gradient
        return -d2.values, d1.values

    @cached_property
    def surface_velocity(self) -> Tuple[np.ndarray, np.ndarray]:
        u1, u2 = self.horizontal_velocity
        return u1[0], u2[0]

    @cached_property
    def _psi2_spline(self) -> CubicSpline:
        return CubicSpline(self.slab.levels, self.psi2.values, axis=0)

    def evaluate(self, z_nodes: Iterable[float]):
        """
        Psi and its gradient at arbitrary heights inside [0, h].

        Returns:
            (psi, (dz, d1, d2)) as arrays of shape (len(z_nodes), n, n)
        """
        z = np.asarray(list(z_nodes), dtype=float)
        if np.any(z < 0) or np.any(z > self.slab.h * (1 + 1e-12)):
            raise SpectralError("evaluation heights must lie in [0, h]")
        grid = self.slab.torus
        spline = self._psi2_spline
        c2 = to_coeffs(spline(z))
        c = psi1_coeffs(self.theta, z) + c2
        dz_c = psi1_dz_coeffs(self.theta, z) + to_coeffs(spline(z, 1))
        return to_values(c), (to_values(dz_c), to_values(grid.ik1 * c), to_values(grid.ik2 * c))


def split(theta: SpectralField2D, omega: LayeredField3D) -> EllipticSplit:
    """Solve both boundary value problems for boundary data theta and vorticity omega."""
    return EllipticSplit(theta, solve_psi1(theta, omega.slab), solve_psi2(omega))


def _gradient_magnitude(grad: Gradient) -> LayeredField3D:
    dz, d1, d2 = grad
    return LayeredField3D(dz.slab, np.sqrt(dz.values ** 2 + d1.values ** 2 + d2.values ** 2))


def trace_ratio(u: LayeredField3D, q: float, grad: Optional[Gradient] = None) -> float:
    """||u(z=0)||_{L^{2q/(3-q)}} / ||grad u||_{L^q(slab)}."""
    grad = gradient(u) if grad is None else grad
    denominator = _gradient_magnitude(grad).lp_norm(q)
    if denominator == 0.0:
        raise SpectralError("trace ratio undefined for a field with zero gradient")
    return boundary_trace(u).lp_norm(float(trace_exponent(q))) / denominator


def psi1_gradient(theta: SpectralField2D, slab: SlabGrid) -> Gradient:
    """Gradient of the harmonic extension, exact in z as well as x."""
    c = psi1_coeffs(theta, slab.levels)
    grid = slab.torus
    return (LayeredField3D.from_coeffs(slab, psi1_dz_coeffs(theta, slab.levels)),
            LayeredField3D.from_coeffs(slab, grid.ik1 * c),
            LayeredField3D.from_coeffs(slab, grid.ik2 * c))


def strong_convergence_errors(theta: SpectralField2D, slab: SlabGrid,
                              ms: Iterable[int] = (4, 8, 16, 32)) -> List[float]:
    """||grad psi1[theta + cos(m x1)/m] - grad psi1[theta]||_{L2(slab)} for each m."""
    grid = slab.torus
    base = psi1_gradient(theta, slab)
    errors = []
    for m in ms:
        wave = 2 * np.pi * m / grid.l
        bump = SpectralField2D.from_function(grid, lambda x1, x2: np.cos(wave * x1) / m)
        shifted = psi1_gradient(theta + bump, slab)
        diff = [s - b for s, b in zip(shifted, base)]
        errors.append(_gradient_magnitude(diff).lp_norm(2))
    return errors
