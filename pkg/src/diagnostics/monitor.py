"""Conservation and a-priori bound monitoring over a diagnostics series."""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from src.diagnostics.records import DiagnosticsRecord
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class MonitorParams:
    """
    Tolerances for the conservation checks.

    lp_tolerance is relative, per step. bound_constant, when set, is the
    calibrated C of the a-priori bound; the margin is C minus the largest ratio.
    """
    energy_tolerance: float = 1e-6
    lp_tolerance: float = 1e-8
    bound_constant: Optional[float] = None


@dataclass
class ConservationReport:
    energy_drift: float
    hamiltonian_drift: float
    energy_increases: int
    lp_violations: Dict[float, int]
    besov_series: Dict[float, List[float]]
    bound_ratios: List[float]
    bound_margin: Optional[float]
    params: MonitorParams = field(default_factory=MonitorParams)

    @property
    def conserves_energy(self) -> bool:
        return self.energy_drift <= self.params.energy_tolerance

    @property
    def conserves_hamiltonian(self) -> bool:
        return self.hamiltonian_drift <= self.params.energy_tolerance

    @property
    def lp_monotone(self) -> bool:
        return not any(self.lp_violations.values())

    @property
    def bound_holds(self) -> Optional[bool]:
        return None if self.bound_margin is None else self.bound_margin >= 0


def relative_drift(series: Sequence[float]) -> float:
    """max |x(t) - x(0)| / |x(0)|; absolute drift when x(0) = 0."""
    values = np.asarray(series, dtype=float)
    drift = float(np.max(np.abs(values - values[0])))
    return drift / abs(values[0]) if values[0] != 0 else drift


def count_increases(series: Sequence[float], tolerance: float) -> int:
    """Steps where x(t_{i+1}) > x(t_i) (1 + tolerance)."""
    values = np.asarray(series, dtype=float)
    return int(np.sum(values[1:] > values[:-1] * (1 + tolerance)))


def bound_ratios(records: Sequence[DiagnosticsRecord]) -> List[float]:
    """
    (||grad Psi||_2 + ||omega||_q + ||theta||_p) over the same sum at t = 0
    plus int_0^t forcing norms, with the first ladder exponents.
    """
    p = next(iter(records[0].lp_theta))
    q = next(iter(records[0].lq_omega))
    ts = np.array([r.t for r in records])
    norms = np.array([math.sqrt(r.energy) + r.lp_theta[p] + r.lq_omega[q] for r in records])
    forcing = np.array([sum(r.forcing_norms.values()) for r in records])
    budget = norms[0] + cumulative_trapezoid(forcing, ts, initial=0.0)
    # zero budget means zero data and zero forcing, hence zero norms
    safe = np.where(budget > 0, budget, 1.0)
    return np.where(budget > 0, norms / safe, 0.0).tolist()


def conservation_monitor(records: Sequence[DiagnosticsRecord],
                         params: MonitorParams = MonitorParams()) -> ConservationReport:
    """
    Summarize a diagnostics series.

    Raises:
        ValueError: fewer than 2 records
    """
    if len(records) < 2:
        raise ValueError(f"conservation monitoring needs at least 2 records, got {len(records)}")

    energies = [r.energy for r in records]
    lp_violations = {
        p: count_increases([r.lp_theta[p] for r in records], params.lp_tolerance)
        for p in records[0].lp_theta
    }
    besov_series = {alpha: [r.besov[alpha] for r in records] for alpha in records[0].besov}
    ratios = bound_ratios(records)
    margin = None if params.bound_constant is None else params.bound_constant - max(ratios)

    report = ConservationReport(
        energy_drift=relative_drift(energies),
        hamiltonian_drift=relative_drift([r.hamiltonian for r in records]),
        energy_increases=count_increases(energies, params.energy_tolerance),
        lp_violations=lp_violations,
        besov_series=besov_series,
        bound_ratios=ratios,
        bound_margin=margin,
        params=params,
    )
    logger.info(
        f"Conservation over {len(records)} records: energy drift {report.energy_drift:.3e}, "
        f"hamiltonian drift {report.hamiltonian_drift:.3e}, "
        f"Lp violations {sum(lp_violations.values())}"
    )
    return report
