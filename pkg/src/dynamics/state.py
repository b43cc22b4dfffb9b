"""Evolution state and step parameters."""
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

from src.config import Config
from src.elliptic.slab import LayeredField3D, SlabGrid
from src.elliptic.solvers import EllipticSplit, split
from src.exceptions import GridError, SpectralError
from src.spectral.grid import SpectralField2D


@dataclass(frozen=True, eq=False)
class SimState:
    """
    Boundary data theta = d_nu Psi and interior vorticity omega = Delta Psi at time t.

    Immutable; the elliptic split is computed on first use and cached.
    """
    t: float
    theta: SpectralField2D
    omega: LayeredField3D

    def __post_init__(self):
        if self.theta.grid != self.omega.torus:
            raise GridError("theta and omega live on different horizontal grids")
        if not self.theta.has_zero_mean():
            raise SpectralError(
                f"state theta must have zero mean (mean coefficient {self.theta.coeffs[0, 0]:.3e})"
            )

    @property
    def slab(self) -> SlabGrid:
        return self.omega.slab

    @cached_property
    def split(self) -> EllipticSplit:
        return split(self.theta, self.omega)

    def at(self, t: float) -> 'SimState':
        return SimState(t, self.theta, self.omega)


@dataclass(frozen=True)
class StepParams:
    """
    Time-step settings.

    sweep is a uniform background velocity (U1, U2) added to every level
    and to the boundary; mollifier_eps is the width used by flux diagnostics.
    """
    dt: float
    eps_diss: float = 0.0
    cfl: float = Config.CFL
    dealias: bool = True
    dt_cap: float = Config.DT_CAP
    sweep: Tuple[float, float] = (0.0, 0.0)
    mollifier_eps: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.eps_diss < 0:
            raise ValueError(f"eps_diss must be >= 0, got {self.eps_diss}")
        if not self.cfl > 0:
            raise ValueError(f"cfl must be positive, got {self.cfl}")
        if not self.dt_cap > 0:
            raise ValueError(f"dt_cap must be positive, got {self.dt_cap}")
