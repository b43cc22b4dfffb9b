"""Lebesgue-exponent arithmetic for the half-space elliptic estimates."""
import math
from fractions import Fraction
from numbers import Real
from typing import Dict, Union

from src.exceptions import ExponentError

Exponent = Union[Fraction, float]


def _as_exact(x: Real) -> Exponent:
    """Keep Fractions and ints exact; floats stay floats."""
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    return float(x)


def _open_interval(x, lo, hi, name):
    if not (lo < x < hi):
        hi_text = '∞' if hi == math.inf else str(hi)
        raise ExponentError(f"{name} = {x} must lie in ({lo}, {hi_text})")


def sobolev_lift(q: Real) -> Exponent:
    """3q/(3-q): integrability of grad u when Delta u is in L^q."""
    q = _as_exact(q)
    _open_interval(q, 1, 3, 'q')
    return 3 * q / (3 - q)


def trace_exponent(q: Real) -> Exponent:
    """2q/(3-q): integrability of the boundary trace."""
    q = _as_exact(q)
    _open_interval(q, 1, 3, 'q')
    return 2 * q / (3 - q)


def neumann_lift(p: Real) -> Exponent:
    """3p/2: integrability of grad u for Neumann data in L^p(R^2)."""
    p = _as_exact(p)
    _open_interval(p, 1, math.inf, 'p')
    return 3 * p / 2


def commutator_threshold(q: Real) -> Exponent:
    """Minimum p for the commutator form of the boundary flux: 2q/(3(q-1))."""
    q = _as_exact(q)
    if not (1 < q <= 3):
        raise ExponentError(f"q = {q} must lie in (1, 3]")
    return 2 * q / (3 * (q - 1))


def equivalence_regimes(p: Real, q: Real) -> Dict[str, bool]:
    """
    Which equivalence statements apply to the exponent pair (p, q).

    direct: q in [3/2, 3] and p >= 2 (all nonlinear terms integrable directly)
    commutator: q in [3/2, 3], p in (4/3, 2] and p >= 2q/(3(q-1))
    extra_integrability: q in [3/2, 3], p in (4/3, 2] below the commutator
        threshold; holds only with an additional L^r bound, r >= 2
    """
    p, q = _as_exact(p), _as_exact(q)
    q_ok = Fraction(3, 2) <= q <= 3
    low_p = Fraction(4, 3) < p <= 2
    above = q_ok and q > 1 and p >= commutator_threshold(q)
    return {
        'direct': bool(q_ok and p >= 2),
        'commutator': bool(q_ok and low_p and above),
        'extra_integrability': bool(q_ok and low_p and not above),
    }
