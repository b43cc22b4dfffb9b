"""Vertical truncation of the half-space and layered fields on it."""
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from src.exceptions import GridError, SpectralError
from src.spectral.grid import PhysField2D, TorusGrid, grid_sum, to_coeffs, to_values


@dataclass(frozen=True)
class SlabGrid:
    """
    Periodic horizontal grid times the levels z_i = i*dz on [0, h].

    z = 0 is the physical boundary; the top level closes the half-space
    with a radiation condition.
    """
    torus: TorusGrid
    nz: int
    h: float = None

    def __post_init__(self):
        if self.h is None:
            object.__setattr__(self, 'h', self.torus.l / 2)
        if self.nz < 16:
            raise GridError(f"nz must be >= 16, got {self.nz}")
        if self.h < self.torus.l / 2 * (1 - 1e-12):
            raise GridError(f"slab height h={self.h:g} must be >= l/2 = {self.torus.l / 2:g}")

    @property
    def dz(self) -> float:
        return self.h / (self.nz - 1)

    @property
    def shape(self):
        return (self.nz, self.torus.n, self.torus.n)

    @cached_property
    def levels(self) -> np.ndarray:
        z = np.arange(self.nz) * self.dz
        z.setflags(write=False)
        return z

    @cached_property
    def z_weights(self) -> np.ndarray:
        """Trapezoid weights on the levels."""
        w = np.full(self.nz, self.dz)
        w[0] = w[-1] = self.dz / 2
        w.setflags(write=False)
        return w

    @cached_property
    def derivative_matrix(self) -> np.ndarray:
        """Second-order d/dz: centered inside, one-sided three-point at both ends."""
        nz, dz = self.nz, self.dz
        D = np.zeros((nz, nz))
        for i in range(1, nz - 1):
            D[i, i - 1] = -0.5 / dz
            D[i, i + 1] = 0.5 / dz
        D[0, :3] = np.array([-3.0, 4.0, -1.0]) / (2 * dz)
        D[-1, -3:] = np.array([1.0, -4.0, 3.0]) / (2 * dz)
        D.setflags(write=False)
        return D

    @cached_property
    def second_derivative_matrix(self) -> np.ndarray:
        """Second-order d2/dz2 with four-point one-sided rows at both ends."""
        nz, dz = self.nz, self.dz
        D2 = np.zeros((nz, nz))
        for i in range(1, nz - 1):
            D2[i, i - 1:i + 2] = np.array([1.0, -2.0, 1.0]) / dz ** 2
        D2[0, :4] = np.array([2.0, -5.0, 4.0, -1.0]) / dz ** 2
        D2[-1, -4:] = np.array([-1.0, 4.0, -5.0, 2.0]) / dz ** 2
        D2.setflags(write=False)
        return D2


def _apply_z(matrix: np.ndarray, array: np.ndarray) -> np.ndarray:
    return np.tensordot(matrix, array, axes=(1, 0))


@dataclass(frozen=True, eq=False)
class LayeredField3D:
    """Real field on every slab level, values indexed [iz, i1, i2]."""
    slab: SlabGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != self.slab.shape:
            raise GridError(f"values shape {values.shape} does not match slab {self.slab.shape}")
        if np.iscomplexobj(values):
            raise SpectralError("layered field values must be real")
        if not np.all(np.isfinite(values)):
            raise SpectralError("layered field contains non-finite values")
        values = np.array(values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, slab: SlabGrid) -> 'LayeredField3D':
        return cls(slab, np.zeros(slab.shape))

    @classmethod
    def from_coeffs(cls, slab: SlabGrid, coeffs: np.ndarray) -> 'LayeredField3D':
        return cls(slab, to_values(coeffs))

    @classmethod
    def from_function(cls, slab: SlabGrid, fn: Callable) -> 'LayeredField3D':
        """Sample fn(z, x1, x2) on the slab nodes."""
        x1, x2 = slab.torus.coordinates
        z = slab.levels[:, None, None]
        return cls(slab, np.broadcast_to(fn(z, x1[None], x2[None]), slab.shape))

    @cached_property
    def coeffs(self) -> np.ndarray:
        c = to_coeffs(self.values)
        c.setflags(write=False)
        return c

    @property
    def torus(self) -> TorusGrid:
        return self.slab.torus

    def layer(self, i: int) -> PhysField2D:
        return PhysField2D(self.torus, self.values[i])

    def lp_norm(self, p: float) -> float:
        """L^p over the slab: trapezoid in z, node sum in x."""
        values = np.abs(self.values)
        if math.isinf(p):
            return float(values.max())
        per_level = np.array([grid_sum(v ** p) for v in values]) * self.torus.dx ** 2
        return grid_sum(self.slab.z_weights * per_level) ** (1.0 / p)

    def __add__(self, other: 'LayeredField3D') -> 'LayeredField3D':
        return LayeredField3D(self.slab, self.values + other.values)

    def __sub__(self, other: 'LayeredField3D') -> 'LayeredField3D':
        return LayeredField3D(self.slab, self.values - other.values)

    def __mul__(self, scalar: float) -> 'LayeredField3D':
        return LayeredField3D(self.slab, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> 'LayeredField3D':
        return LayeredField3D(self.slab, -self.values)


def slab_integral(slab: SlabGrid, values: np.ndarray) -> float:
    """Trapezoid-in-z, node-sum-in-x integral of a [iz, i1, i2] array."""
    per_level = np.array([grid_sum(v) for v in values]) * slab.torus.dx ** 2
    return grid_sum(slab.z_weights * per_level)


def slab_inner(a: LayeredField3D, b: LayeredField3D) -> float:
    return slab_integral(a.slab, a.values * b.values)


def z_derivative(slab: SlabGrid, values: np.ndarray) -> np.ndarray:
    """Second-order vertical derivative of a [iz, ...] array (real or complex)."""
    return _apply_z(slab.derivative_matrix, values)


def z_second_derivative(slab: SlabGrid, values: np.ndarray) -> np.ndarray:
    return _apply_z(slab.second_derivative_matrix, values)
