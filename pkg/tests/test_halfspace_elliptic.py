"""
Test the half-space elliptic split, the vertical solvers and the Hodge projector.
"""
import sys
import os
import math
import unittest
from fractions import Fraction
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from src.commutator.littlewood_paley import log_log_slope
from src.elliptic.exponents import (
    commutator_threshold, equivalence_regimes, neumann_lift, sobolev_lift, trace_exponent,
)
from src.elliptic.hodge import hodge_project
from src.elliptic.slab import LayeredField3D, SlabGrid, slab_inner, z_derivative
from src.elliptic.solvers import (
    boundary_trace, get_psi2_solver, gradient, horizontal_derivatives, solve_psi1, split,
    strong_convergence_errors, trace_ratio,
)
from src.elliptic.tridiagonal import factor_tridiag, solve_tridiag
from src.exceptions import ExponentError, GridError, SpectralError
from src.spectral.grid import SpectralField2D, TorusGrid, random_band_limited, to_values
from src.verification.checks import psi2_manufactured_error


class TestSlabGrid(unittest.TestCase):

    def test_defaults_and_limits(self):
        slab = SlabGrid(TorusGrid(16), 16)
        self.assertAlmostEqual(slab.h, math.pi)
        self.assertAlmostEqual(slab.levels[-1], slab.h)
        self.assertAlmostEqual(float(np.sum(slab.z_weights)), slab.h)
        with self.assertRaises(GridError):
            SlabGrid(TorusGrid(16), 8)
        with self.assertRaises(GridError):
            SlabGrid(TorusGrid(16), 16, 1.0)
        print("✅ Test passed: h = l/2 default, nz >= 16, h >= l/2")

    def test_vertical_derivative_exact_on_quadratics(self):
        slab = SlabGrid(TorusGrid(8), 16)
        z = slab.levels
        values = (z ** 2 - 3 * z)[:, None, None] * np.ones((1, 8, 8))
        dz = z_derivative(slab, values)[:, 0, 0]
        np.testing.assert_allclose(dz, 2 * z - 3, atol=1e-10)
        print("✅ Test passed: second-order stencils exact on quadratics")


class TestPsi1(unittest.TestCase):

    def test_exact_harmonic_extension(self):
        slab = SlabGrid(TorusGrid(16), 16)
        theta = SpectralField2D.from_function(slab.torus, lambda x1, x2: np.cos(x1) + np.sin(2 * x2))
        x1, x2 = slab.torus.coordinates
        z = slab.levels[:, None, None]
        exact = np.exp(-z) * np.cos(x1)[None] + np.exp(-2 * z) * np.sin(2 * x2)[None] / 2
        error = float(np.max(np.abs(solve_psi1(theta, slab).values - exact)))
        self.assertLess(error, 1e-12)
        print(f"✅ Test passed: psi1 = sum theta(k) exp(-|k| z)/|k| e^(ikx), error {error:.2e}")

    def test_nonzero_mean_rejected(self):
        slab = SlabGrid(TorusGrid(16), 16)
        theta = SpectralField2D.from_function(slab.torus, lambda x1, x2: 1.0 + np.cos(x1))
        with self.assertRaises(SpectralError):
            solve_psi1(theta, slab)
        print("✅ Test passed: boundary data must have zero mean")

    def test_neumann_trace_and_divergence(self):
        slab = SlabGrid(TorusGrid(16), 16)
        theta = random_band_limited(slab.torus, 4, np.random.default_rng(4))
        sp = split(theta, LayeredField3D.zeros(slab))
        trace = -to_values(sp.dz_coeffs[0])
        self.assertLess(float(np.max(np.abs(trace - theta.to_physical().values))), 1e-12)
        psi, (dz, d1, d2) = sp.evaluate(slab.levels)
        self.assertLess(float(np.max(np.abs(psi - sp.psi.values))), 1e-10)
        with self.assertRaises(SpectralError):
            sp.evaluate([slab.h * 1.5])
        print("✅ Test passed: -dz Psi(0) = theta, evaluate matches the levels")

    def test_strong_convergence(self):
        slab = SlabGrid(TorusGrid(128), 16)
        theta = random_band_limited(slab.torus, 3, np.random.default_rng(6))
        ms = (4, 8, 16, 32)
        errors = strong_convergence_errors(theta, slab, ms=ms)
        self.assertTrue(all(a > b for a, b in zip(errors, errors[1:])))
        # ||grad psi1[cos(m x1)/m]||_2 ~ m^(-3/2)
        self.assertLess(log_log_slope(ms, errors)[0], -1.0)
        print(f"✅ Test passed: gradient errors decrease {[f'{e:.3e}' for e in errors]}")

    def test_gradient_and_trace(self):
        slab = SlabGrid(TorusGrid(16), 64)
        theta = SpectralField2D.from_function(slab.torus, lambda x1, x2: np.cos(x1))
        psi = solve_psi1(theta, slab)
        dz, d1, d2 = gradient(psi)
        x1 = slab.torus.coordinates[0]
        decay = np.exp(-slab.levels)[:, None, None]
        self.assertLess(float(np.max(np.abs(d1.values + decay * np.sin(x1)[None]))), 1e-12)
        self.assertLess(float(np.max(np.abs(d2.values))), 1e-12)
        self.assertLess(float(np.max(np.abs(dz.values + decay * np.cos(x1)[None]))), 5e-3)
        trace = boundary_trace(psi)
        self.assertLess(float(np.max(np.abs(trace.values - np.cos(x1)))), 1e-12)
        print("✅ Test passed: spectral x-derivatives, second-order dz, trace at z = 0")

    def test_trace_ratio(self):
        slab = SlabGrid(TorusGrid(16), 16)
        theta = SpectralField2D.from_function(slab.torus, lambda x1, x2: np.cos(x1))
        ratio = trace_ratio(solve_psi1(theta, slab), 2.0)
        self.assertTrue(math.isfinite(ratio) and ratio > 0)
        with self.assertRaises(SpectralError):
            trace_ratio(LayeredField3D.zeros(slab), 2.0)
        print(f"✅ Test passed: trace ratio {ratio:.4f}")


class TestPsi2(unittest.TestCase):

    def test_manufactured_second_order(self):
        sizes = (32, 64, 128)
        errors = [psi2_manufactured_error(nz) for nz in sizes]
        slope, _ = log_log_slope([1.0 / (nz - 1) for nz in sizes], errors)
        self.assertGreater(slope, 1.9)
        print(f"✅ Test passed: psi2 errors {[f'{e:.2e}' for e in errors]}, order {slope:.3f}")

    def test_mean_mode(self):
        slab = SlabGrid(TorusGrid(8), 128)
        w = math.pi / slab.h
        z = slab.levels
        psi = get_psi2_solver(slab).solve_mean_mode(np.cos(w * z))
        error = float(np.max(np.abs(psi + np.cos(w * z) / w ** 2)))
        self.assertLess(error, 5e-3)
        print(f"✅ Test passed: k = 0 mode, error {error:.2e}")

    def test_zero_vorticity_gives_zero(self):
        slab = SlabGrid(TorusGrid(8), 16)
        coeffs = get_psi2_solver(slab).solve_coeffs(np.zeros(slab.shape, dtype=complex))
        self.assertEqual(float(np.max(np.abs(coeffs))), 0.0)
        print("✅ Test passed: omega = 0 -> psi2 = 0")


class TestTridiagonal(unittest.TestCase):

    def test_against_dense_solve(self):
        rng = np.random.default_rng(8)
        n, m = 12, 3
        a = rng.uniform(-1, 1, (n - 1, m))
        c = rng.uniform(-1, 1, (n - 1, m))
        b = 4.0 + rng.uniform(0, 1, (n, m))
        f = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        x = solve_tridiag(factor_tridiag(a, b, c), f)
        for j in range(m):
            A = np.diag(b[:, j]) + np.diag(a[:, j], -1) + np.diag(c[:, j], 1)
            np.testing.assert_allclose(x[:, j], np.linalg.solve(A, f[:, j]), atol=1e-12)
        print("✅ Test passed: batched Thomas solve matches dense solve")

    def test_singular_pivot(self):
        with self.assertRaises(SpectralError):
            factor_tridiag(np.ones((2, 1)), np.zeros((3, 1)), np.ones((2, 1)))
        print("✅ Test passed: zero pivot rejected")


class TestHodge(unittest.TestCase):

    def setUp(self):
        self.slab = SlabGrid(TorusGrid(8), 16)
        rng = np.random.default_rng(9)
        self.w = LayeredField3D(self.slab, rng.standard_normal(self.slab.shape))
        self.v = tuple(LayeredField3D(self.slab, rng.standard_normal(self.slab.shape)) for _ in range(3))

    def _gradient(self, w):
        d1, d2 = horizontal_derivatives(w)
        return (LayeredField3D(self.slab, z_derivative(self.slab, w.values)), d1, d2)

    def test_gradients_are_fixed(self):
        g = self._gradient(self.w)
        projected = hodge_project(g)
        scale = max(float(np.max(np.abs(c.values))) for c in g)
        error = max(float(np.max(np.abs(p.values - c.values))) for p, c in zip(projected, g))
        self.assertLess(error / scale, 1e-9)
        print(f"✅ Test passed: P grad w = grad w, relative error {error / scale:.2e}")

    def test_idempotent_and_orthogonal(self):
        once = hodge_project(self.v)
        twice = hodge_project(once)
        scale = max(float(np.max(np.abs(c.values))) for c in once)
        error = max(float(np.max(np.abs(a.values - b.values))) for a, b in zip(once, twice))
        self.assertLess(error / scale, 1e-9)
        inner = sum(slab_inner(v - p, p) for v, p in zip(self.v, once))
        norm = sum(slab_inner(p, p) for p in once)
        self.assertLess(abs(inner) / norm, 1e-9)
        print("✅ Test passed: P^2 = P, v - Pv orthogonal to gradients")

    def test_weak_divergence_matches_on_random_gradients(self):
        """int grad phi . v = int grad phi . P v for random test gradients."""
        slab = SlabGrid(TorusGrid(64), 64)
        rng = np.random.default_rng(10)
        v = tuple(LayeredField3D(slab, rng.standard_normal(slab.shape)) for _ in range(3))
        projected = hodge_project(v)
        v_norm = math.sqrt(sum(slab_inner(c, c) for c in v))
        worst = 0.0
        for _ in range(10):
            phi = LayeredField3D(slab, rng.standard_normal(slab.shape))
            d1, d2 = horizontal_derivatives(phi)
            g = (LayeredField3D(slab, z_derivative(slab, phi.values)), d1, d2)
            g_norm = math.sqrt(sum(slab_inner(c, c) for c in g))
            gap = sum(slab_inner(gc, vc - pc) for gc, vc, pc in zip(g, v, projected))
            worst = max(worst, abs(gap) / (g_norm * v_norm))
        self.assertLess(worst, 1e-6)
        print(f"✅ Test passed: worst relative gap {worst:.2e} over 10 test gradients")

    def test_curls_are_annihilated(self):
        slab = SlabGrid(TorusGrid(16), 32)
        torus = slab.torus
        rng = np.random.default_rng(11)
        a = [rng.standard_normal(slab.shape) for _ in range(3)]
        for component in a[1:]:
            component[:3] = 0.0
            component[-3:] = 0.0
        az, a1, a2 = (LayeredField3D(slab, values).coeffs for values in a)
        curl = (torus.ik1 * a2 - torus.ik2 * a1,
                torus.ik2 * az - z_derivative(slab, a2),
                z_derivative(slab, a1) - torus.ik1 * az)
        v = tuple(LayeredField3D.from_coeffs(slab, c) for c in curl)
        projected = hodge_project(v)
        scale = max(float(np.max(np.abs(c.values))) for c in v)
        residual = max(float(np.max(np.abs(p.values))) for p in projected)
        self.assertLess(residual / scale, 1e-10)
        print(f"✅ Test passed: P curl A = 0, relative size {residual / scale:.2e}")


class TestExponents(unittest.TestCase):

    def test_values(self):
        self.assertEqual(sobolev_lift(2), 6)
        self.assertEqual(trace_exponent(2), 4)
        self.assertEqual(neumann_lift(2), 3)
        self.assertEqual(commutator_threshold(Fraction(3, 2)), 2)
        self.assertEqual(commutator_threshold(3), 1)
        self.assertIsInstance(trace_exponent(Fraction(3, 2)), Fraction)
        self.assertEqual(trace_exponent(Fraction(3, 2)), 2)
        print("✅ Test passed: exponent arithmetic exact on fractions")

    def test_ranges(self):
        for bad in (lambda: sobolev_lift(3), lambda: trace_exponent(1), lambda: neumann_lift(1),
                    lambda: commutator_threshold(1)):
            with self.assertRaises(ExponentError):
                bad()
        print("✅ Test passed: open intervals enforced")

    def test_regimes(self):
        self.assertEqual(equivalence_regimes(2, 2),
                         {'direct': True, 'commutator': True, 'extra_integrability': False})
        self.assertEqual(equivalence_regimes(Fraction(3, 2), 2),
                         {'direct': False, 'commutator': True, 'extra_integrability': False})
        self.assertEqual(equivalence_regimes(Fraction(3, 2), Fraction(3, 2)),
                         {'direct': False, 'commutator': False, 'extra_integrability': True})
        self.assertFalse(any(equivalence_regimes(3, Fraction(5, 4)).values()))
        print("✅ Test passed: direct, commutator and extra-integrability regimes")


if __name__ == '__main__':
    print("=" * 70)
    print("TEST: Half-space Elliptic")
    print("=" * 70)
    print()
    unittest.main(argv=[''], exit=False, verbosity=2)
