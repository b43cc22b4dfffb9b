"""Property-based checks of exponent arithmetic and multiplier round trips."""
import sys
import os
from fractions import Fraction
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from src.elliptic.exponents import (
    commutator_threshold, equivalence_regimes, neumann_lift, sobolev_lift, trace_exponent,
)
from src.harmonic.operators import lambda_pow, poisson_extend
from src.spectral.grid import TorusGrid, random_band_limited

inside_q = st.fractions(min_value=Fraction(101, 100), max_value=Fraction(299, 100))
any_p = st.fractions(min_value=Fraction(101, 100), max_value=Fraction(10))

GRID = TorusGrid(16)


@given(inside_q)
def test_trace_and_sobolev_exponents(q):
    assert trace_exponent(q) * Fraction(3, 2) == sobolev_lift(q)
    assert sobolev_lift(q) > q


@given(st.fractions(min_value=Fraction(101, 100), max_value=Fraction(3)))
def test_commutator_threshold_at_least_one(q):
    assert commutator_threshold(q) >= 1


@given(any_p)
def test_neumann_lift_gains(p):
    assert neumann_lift(p) == Fraction(3, 2) * p


@given(any_p, st.fractions(min_value=Fraction(1, 2), max_value=Fraction(4)))
def test_regimes_are_consistent(p, q):
    regimes = equivalence_regimes(p, q)
    assert not (regimes['commutator'] and regimes['extra_integrability'])
    if Fraction(3, 2) <= q <= 3 and Fraction(4, 3) < p <= 2:
        assert regimes['commutator'] or regimes['extra_integrability']
    if not Fraction(3, 2) <= q <= 3:
        assert not any(regimes.values())


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-2.0, max_value=2.0), st.integers(min_value=0, max_value=2 ** 16))
def test_lambda_powers_invert(s, seed):
    field = random_band_limited(GRID, 6, np.random.default_rng(seed))
    back = lambda_pow(-s, lambda_pow(s, field))
    assert float(np.max(np.abs(back.coeffs - field.coeffs))) <= 1e-12 * float(np.max(np.abs(field.coeffs)))


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.0, max_value=3.0), st.floats(min_value=0.0, max_value=3.0))
def test_poisson_semigroup(z1, z2):
    field = random_band_limited(GRID, 6, np.random.default_rng(0))
    twice = poisson_extend(poisson_extend(field, z1), z2)
    once = poisson_extend(field, z1 + z2)
    assert float(np.max(np.abs(twice.coeffs - once.coeffs))) <= 1e-12 * float(np.max(np.abs(field.coeffs)))


if __name__ == '__main__':
    print("=" * 70)
    print("TEST: Properties")
    print("=" * 70)
    print()
    for check in (test_trace_and_sobolev_exponents, test_commutator_threshold_at_least_one,
                  test_neumann_lift_gains, test_regimes_are_consistent,
                  test_lambda_powers_invert, test_poisson_semigroup):
        check()
        print(f"  ✅ PASS: {check.__name__}")
