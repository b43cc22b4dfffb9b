"""Calibrated constants for inequalities whose constant is not quantified."""
import math
from typing import Iterable

from src.config import Config


def calibrated_constant(ratios: Iterable[float], factor: float = None) -> float:
    """
    factor times the largest ratio seen on a calibration family.

    Raises:
        ValueError: empty family, non-finite ratio or factor < 1
    """
    factor = Config.CALIBRATION_FACTOR if factor is None else factor
    if factor < 1:
        raise ValueError(f"calibration factor must be >= 1, got {factor}")
    values = list(ratios)
    if not values:
        raise ValueError("calibration family is empty")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("calibration ratios must be finite")
    return factor * max(values)
