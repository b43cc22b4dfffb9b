"""Time-dependent forcing generators for the interior and boundary equations."""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from src.elliptic.slab import LayeredField3D, SlabGrid
from src.exceptions import SpectralError
from src.spectral.grid import SpectralField2D, TorusGrid, forward_transform, PhysField2D

SurfaceForcing = Callable[[float], SpectralField2D]
InteriorForcing = Callable[[float], LayeredField3D]


@dataclass(frozen=True)
class ForcingSpec:
    """f_nu drives the boundary equation, f_L the interior one; None means zero."""
    f_nu: Optional[SurfaceForcing] = None
    f_L: Optional[InteriorForcing] = None

    @property
    def is_zero(self) -> bool:
        return self.f_nu is None and self.f_L is None

    def surface(self, t: float, grid: TorusGrid) -> SpectralField2D:
        if self.f_nu is None:
            return SpectralField2D.zeros(grid)
        value = self.f_nu(t)
        if not value.has_zero_mean():
            raise SpectralError(f"boundary forcing at t={t:g} has nonzero mean")
        return value

    def interior(self, t: float, slab: SlabGrid) -> LayeredField3D:
        if self.f_L is None:
            return LayeredField3D.zeros(slab)
        return self.f_L(t)


NO_FORCING = ForcingSpec()


def _wave(grid: TorusGrid, mode: Sequence[int]):
    return tuple(2 * math.pi * m / grid.l for m in mode)


def surface_mode_forcing(grid: TorusGrid, amplitude: float, frequency: float,
                         mode: Sequence[int] = (1, 0),
                         drift: Sequence[float] = (0.0, 0.0)) -> SurfaceForcing:
    """f_nu(t, x) = a cos(Omega t) cos(k . (x - U t))."""
    k1, k2 = _wave(grid, mode)
    u1, u2 = drift
    x1, x2 = grid.coordinates

    def f_nu(t: float) -> SpectralField2D:
        phase = k1 * (x1 - u1 * t) + k2 * (x2 - u2 * t)
        return forward_transform(PhysField2D(grid, amplitude * math.cos(frequency * t) * np.cos(phase)))

    return f_nu


def interior_mode_forcing(slab: SlabGrid, amplitude: float, frequency: float,
                          mode: Sequence[int] = (1, 1)) -> InteriorForcing:
    """f_L(t, z, x) = a cos(Omega t) sin^2(pi z / h) cos(k . x)."""
    k1, k2 = _wave(slab.torus, mode)
    profile = np.sin(np.pi * slab.levels / slab.h) ** 2
    x1, x2 = slab.torus.coordinates
    shape = profile[:, None, None] * np.cos(k1 * x1 + k2 * x2)[None]

    def f_L(t: float) -> LayeredField3D:
        return LayeredField3D(slab, amplitude * math.cos(frequency * t) * shape)

    return f_L


FORCING_BUILDERS = {
    'none': lambda slab, amplitude, frequency: NO_FORCING,
    'surface_mode': lambda slab, amplitude, frequency: ForcingSpec(
        f_nu=surface_mode_forcing(slab.torus, amplitude, frequency)),
    'interior_mode': lambda slab, amplitude, frequency: ForcingSpec(
        f_L=interior_mode_forcing(slab, amplitude, frequency)),
}


def build_forcing(name: str, slab: SlabGrid, amplitude: float, frequency: float) -> ForcingSpec:
    try:
        builder = FORCING_BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown forcing generator {name!r}") from None
    if amplitude == 0:
        return NO_FORCING
    return builder(slab, amplitude, frequency)
