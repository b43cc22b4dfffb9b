"""Per-snapshot diagnostics record."""
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from src.commutator.littlewood_paley import band_norms
from src.diagnostics.energy import energy, hamiltonian
from src.diagnostics.flux import onsager_flux
from src.dynamics.forcing import NO_FORCING, ForcingSpec
from src.dynamics.state import SimState
from src.elliptic.slab import slab_integral
from src.elliptic.solvers import laplacian
from src.exceptions import ExponentError
from src.spectral.grid import SpectralField2D, TorusGrid, to_coeffs, to_values
from src.spectral.mollifier import Mollifier
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

RESIDUAL_NAMES = ('laplacian', 'neumann', 'divergence')
FORCING_NAMES = ('f_L', 'f_nu')

# Lebesgue exponent of the Besov monitor
BESOV_P = 3


@dataclass(frozen=True)
class DiagnosticSettings:
    """Exponent ladders and mollifier width; mollifier_eps None means min(4 dx, l/8)."""
    p_ladder: Tuple[float, ...] = (2.0, 3.0, 4.0)
    q_ladder: Tuple[float, ...] = (2.0,)
    alphas: Tuple[float, ...] = (0.4, 0.6, 0.8)
    mollifier_eps: Optional[float] = None
    sweep: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for alpha in self.alphas:
            if not 0 < alpha < 1:
                raise ExponentError(f"Besov smoothness alpha must lie in (0, 1), got {alpha}")
        for p in self.p_ladder + self.q_ladder:
            if p < 1:
                raise ExponentError(f"Lebesgue exponent must be >= 1, got {p}")

    @classmethod
    def from_run_config(cls, cfg) -> 'DiagnosticSettings':
        return cls(cfg.p_ladder, cfg.q_ladder, cfg.alphas, cfg.mollifier_eps)

    def mollifier(self, grid: TorusGrid) -> Mollifier:
        if self.mollifier_eps is not None:
            return Mollifier(self.mollifier_eps)
        return Mollifier(min(4 * grid.dx, grid.l / 8))


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy: float
    hamiltonian: float
    flux: float
    lp_theta: Dict[float, float] = field(default_factory=dict)
    lq_omega: Dict[float, float] = field(default_factory=dict)
    besov: Dict[float, float] = field(default_factory=dict)
    besov_surface: Dict[float, float] = field(default_factory=dict)
    residuals: Dict[str, float] = field(default_factory=dict)
    forcing_norms: Dict[str, float] = field(default_factory=dict)

    MAPS = ('lp_theta', 'lq_omega', 'besov', 'besov_surface')

    def __post_init__(self):
        values = [self.t, self.energy, self.hamiltonian, self.flux]
        for name in self.MAPS:
            values.extend(getattr(self, name).values())
        values.extend(self.residuals.values())
        values.extend(self.forcing_norms.values())
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"non-finite diagnostic at t={self.t:g}")

    def as_row(self) -> Dict[str, float]:
        """Flat column -> value map; exponent-keyed entries become name[exponent]."""
        row = {'t': self.t, 'energy': self.energy, 'hamiltonian': self.hamiltonian, 'flux': self.flux}
        for name in self.MAPS:
            for key, value in getattr(self, name).items():
                row[f"{name}[{float(key)!r}]"] = value
        for key, value in self.residuals.items():
            row[f"residual_{key}"] = value
        for key, value in self.forcing_norms.items():
            row[f"forcing_{key}"] = value
        return row

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> 'DiagnosticsRecord':
        maps = {name: {} for name in cls.MAPS}
        residuals, forcing = {}, {}
        for column, text in row.items():
            value = float(text)
            if '[' in column:
                name, key = column[:-1].split('[', 1)
                maps[name][float(key)] = value
            elif column.startswith('residual_'):
                residuals[column[len('residual_'):]] = value
            elif column.startswith('forcing_'):
                forcing[column[len('forcing_'):]] = value
        return cls(float(row['t']), float(row['energy']), float(row['hamiltonian']), float(row['flux']),
                   residuals=residuals, forcing_norms=forcing, **maps)


def _besov_from_bands(norms: Dict[int, float], alpha: float) -> float:
    return max((2.0 ** (j * alpha) * v for j, v in norms.items()), default=0.0)


def _besov_sup(layers, alphas) -> Dict[float, float]:
    """sup over fields of the Besov norm, with band norms computed once per field."""
    best = {alpha: 0.0 for alpha in alphas}
    for u in layers:
        norms = band_norms(u, BESOV_P)
        for alpha in alphas:
            best[alpha] = max(best[alpha], _besov_from_bands(norms, alpha))
    return best


def strong_residuals(s: SimState) -> Dict[str, float]:
    """
    Relative strong-form defects of the computed split.

    laplacian: Delta psi2 - omega on interior levels; neumann: -dz Psi(0) - theta;
    divergence: horizontal divergence of the level velocities.
    """
    sp = s.split
    grid = s.slab.torus
    omega = s.omega.values

    if np.any(omega):
        defect = (laplacian(sp.psi2).values - omega)[1:-1]
        lap = float(np.max(np.abs(defect))) / float(np.max(np.abs(omega)))
    else:
        lap = 0.0

    theta = s.theta.to_physical().values
    trace = -to_values(sp.dz_coeffs[0])
    scale = float(np.max(np.abs(theta)))
    neumann = float(np.max(np.abs(trace - theta))) / scale if scale > 0 else float(np.max(np.abs(trace)))

    u1, u2 = sp.horizontal_velocity
    c1, c2 = to_coeffs(u1), to_coeffs(u2)
    div = to_values(grid.ik1 * c1 + grid.ik2 * c2)
    speed = float(np.max(np.hypot(u1, u2)))
    divergence = float(np.max(np.abs(div))) / speed if speed > 0 else 0.0
    return {'laplacian': lap, 'neumann': neumann, 'divergence': divergence}


def compute_record(s: SimState, settings: DiagnosticSettings = DiagnosticSettings(),
                   f: ForcingSpec = NO_FORCING) -> DiagnosticsRecord:
    """All per-snapshot diagnostics of one state."""
    slab, grid = s.slab, s.slab.torus
    theta_phys = s.theta.to_physical()

    sp = s.split
    level_fields = []
    for component in sp.gradient:
        c = component.coeffs
        level_fields.extend(SpectralField2D(grid, c[iz]) for iz in range(slab.nz))
    u1, u2 = sp.surface_velocity
    surface = [SpectralField2D(grid, to_coeffs(u)) for u in (u1, u2)]

    forcing_norms = {}
    if not f.is_zero:
        forcing_norms = {
            'f_L': f.interior(s.t, slab).lp_norm(settings.q_ladder[0]),
            'f_nu': f.surface(s.t, grid).to_physical().lp_norm(settings.p_ladder[0]),
        }

    record = DiagnosticsRecord(
        t=s.t,
        energy=energy(s),
        hamiltonian=hamiltonian(s.theta),
        flux=onsager_flux(s, settings.mollifier(grid), settings.sweep),
        lp_theta={p: theta_phys.lp_norm(p) for p in settings.p_ladder},
        lq_omega={q: s.omega.lp_norm(q) for q in settings.q_ladder},
        besov=_besov_sup(level_fields, settings.alphas),
        besov_surface=_besov_sup(surface, settings.alphas),
        residuals=strong_residuals(s),
        forcing_norms=forcing_norms,
    )
    logger.debug(f"t={s.t:.4f} energy={record.energy:.12e} hamiltonian={record.hamiltonian:.12e}")
    return record


def omega_norm(s: SimState) -> float:
    """||omega||_{L2(slab)}."""
    return math.sqrt(slab_integral(s.slab, s.omega.values ** 2))
