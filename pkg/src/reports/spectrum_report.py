"""
Plot-ready run reports.

Writes spectrum.csv (j, band_energy, besov_contrib), equivalence.csv and
PNG figures of the dyadic spectrum and the energy/Hamiltonian series.
"""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import matplotlib
matplotlib.use('Agg')  # files only, no display
import matplotlib.pyplot as plt

from src.commutator.littlewood_paley import band_energies, besov_contributions
from src.diagnostics.equivalence import EquivalenceReport
from src.diagnostics.records import DiagnosticsRecord
from src.spectral.grid import SpectralField2D
from src.tracking.diagnostics_logger import write_rows
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

SPECTRUM_COLUMNS = ('j', 'band_energy', 'besov_contrib')


def spectrum_rows(theta: SpectralField2D, alpha: float, p: float = 3) -> List[Dict[str, object]]:
    """Per dyadic band: L2 energy and 2^(j alpha) ||Delta_j theta||_{L^p}."""
    energies = band_energies(theta)
    contributions = besov_contributions(theta, alpha, p)
    return [
        {'j': j, 'band_energy': energies[j], 'besov_contrib': contributions[j]}
        for j in sorted(energies)
    ]


class RunReport:
    """Writes the files a run or diagnose pass leaves behind."""

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def write_spectrum(self, theta: SpectralField2D, alpha: float, p: float = 3,
                       plot: bool = True) -> Path:
        rows = spectrum_rows(theta, alpha, p)
        path = write_rows(rows, self.output_dir / 'spectrum.csv')
        logger.info(f"Spectrum written to {path} ({len(rows)} bands)")
        if plot:
            self.plot_spectrum(rows)
        return path

    def plot_spectrum(self, rows: Sequence[Dict[str, object]], filename: str = 'spectrum.png') -> Optional[Path]:
        positive = [r for r in rows if r['band_energy'] > 0]
        if not positive:
            logger.warning("Spectrum plot skipped: every band is empty")
            return None
        scales = [2.0 ** r['j'] for r in positive]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.loglog(scales, [r['band_energy'] for r in positive], 'o-', label='band energy')
        ax.loglog(scales, [max(r['besov_contrib'], 1e-300) for r in positive], 's--', label='Besov contribution')
        ax.set_xlabel('2^j')
        ax.legend()
        ax.grid(True, which='both', alpha=0.3)
        path = self.output_dir / filename
        fig.savefig(path, dpi=120, bbox_inches='tight')
        plt.close(fig)
        return path

    def plot_energy_series(self, records: Sequence[DiagnosticsRecord],
                           filename: str = 'energy.png') -> Optional[Path]:
        if not records:
            logger.warning("Energy plot skipped: no diagnostics records")
            return None
        ts = [r.t for r in records]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(ts, [r.energy for r in records], label='energy')
        ax.plot(ts, [r.hamiltonian for r in records], '--', label='Hamiltonian')
        ax.set_xlabel('t')
        ax.legend()
        ax.grid(True, alpha=0.3)
        path = self.output_dir / filename
        fig.savefig(path, dpi=120, bbox_inches='tight')
        plt.close(fig)
        return path

    def write_equivalence(self, report: EquivalenceReport) -> Optional[Path]:
        rows = report.to_rows()
        if not rows:
            return None
        return write_rows(rows, self.output_dir / 'equivalence.csv')
