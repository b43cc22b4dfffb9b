"""Side-by-side residuals of the three weak formulations over a test-function suite."""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence

from src.diagnostics.test_functions import TestFunctionSpec
from src.diagnostics.weak_forms import (
    Trajectory, boundary_terms, check_trajectory, combined_qg_residual, interior_terms,
    normalized_residual, rqg_terms,
)
from src.dynamics.forcing import NO_FORCING, ForcingSpec
from src.dynamics.state import StepParams
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

FORMULATIONS = ('rqg', 'qg', 'qg_commutator')

# Residuals of a consistent trajectory agree to this level
DEFAULT_TOLERANCE = 1e-6


@dataclass(frozen=True)
class EquivalenceRow:
    """Residuals of one test function; qg forms combine interior and boundary terms."""
    index: int
    kind: str
    residuals: Dict[str, float]

    @property
    def differences(self) -> Dict[str, float]:
        return {
            f"{a}-{b}": abs(self.residuals[a] - self.residuals[b])
            for a, b in combinations(FORMULATIONS, 2)
        }

    @property
    def max_difference(self) -> float:
        return max(self.differences.values())


@dataclass
class EquivalenceReport:
    rows: List[EquivalenceRow]
    tolerance: float = DEFAULT_TOLERANCE
    flag_threshold: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.max_difference <= self.tolerance for row in self.rows)

    @property
    def worst(self) -> Dict[str, float]:
        return {name: max(row.residuals[name] for row in self.rows) for name in FORMULATIONS}

    @property
    def flagged(self) -> Dict[str, bool]:
        """Per formulation: does any row exceed flag_threshold?"""
        threshold = self.tolerance if self.flag_threshold is None else self.flag_threshold
        return {name: value > threshold for name, value in self.worst.items()}

    def to_rows(self) -> List[Dict[str, object]]:
        """Flat dicts for CSV export."""
        out = []
        for row in self.rows:
            record = {'index': row.index, 'kind': row.kind}
            record.update(row.residuals)
            record.update(row.differences)
            out.append(record)
        return out


def equivalence_row(trajectory: Trajectory, index: int, phi: TestFunctionSpec,
                    f: ForcingSpec = NO_FORCING, params: Optional[StepParams] = None) -> EquivalenceRow:
    """
    Three residuals for one closure-kind test function.

    phi restricted to z = 0 serves as the boundary test function, so the
    boundary-and-interior forms test the same identity as the gradient form.
    """
    interior = interior_terms(trajectory, phi, f, params)
    residuals = {
        'rqg': normalized_residual(rqg_terms(trajectory, phi, f, params)),
        'qg': combined_qg_residual(interior, boundary_terms(trajectory, phi, f, params)),
        'qg_commutator': combined_qg_residual(
            interior, boundary_terms(trajectory, phi, f, params, commutator=True)),
    }
    return EquivalenceRow(index, phi.kind, residuals)


def equivalence_report(trajectory: Trajectory, suite: Sequence[TestFunctionSpec],
                       f: ForcingSpec = NO_FORCING, params: Optional[StepParams] = None,
                       tolerance: float = DEFAULT_TOLERANCE,
                       flag_threshold: Optional[float] = None) -> EquivalenceReport:
    """
    Residual table for every test function in the suite.

    Raises:
        WeakFormError: fewer than 2 snapshots or non-uniform cadence
    """
    check_trajectory(trajectory)
    rows = [equivalence_row(trajectory, i, phi, f, params) for i, phi in enumerate(suite)]
    report = EquivalenceReport(rows, tolerance, flag_threshold)
    if rows:
        worst = report.worst
        logger.info(
            f"Equivalence over {len(rows)} test functions: "
            + ", ".join(f"{name}={value:.3e}" for name, value in worst.items())
            + f" -> {'PASS' if report.passed else 'FAIL'}"
        )
    return report
