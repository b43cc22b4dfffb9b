"""
Test energy functionals, the mollified flux, weak-form residuals and monitors.
"""
import sys
import os
import math
import unittest
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from src.config import Config, RunConfig
from src.diagnostics.calibration import calibrated_constant
from src.diagnostics.energy import energy, hamiltonian, lp_dissipation_integral
from src.diagnostics.equivalence import EquivalenceReport, EquivalenceRow, equivalence_report
from src.diagnostics.flux import flux_decay_slope, onsager_flux
from src.diagnostics.monitor import (
    MonitorParams, bound_ratios, conservation_monitor, count_increases, relative_drift,
)
from src.diagnostics.records import DiagnosticSettings, DiagnosticsRecord, compute_record, omega_norm
from src.diagnostics.test_functions import TestFunctionSpec, test_function_suite
from src.diagnostics.weak_forms import (
    check_trajectory, interior_terms, normalized_residual, time_integral, weak_residual_qg,
    weak_residual_qg_commutator, weak_residual_rqg,
)
from src.dynamics.forcing import ForcingSpec, interior_mode_forcing
from src.dynamics.initial_data import initial_state
from src.dynamics.runner import build_slab
from src.dynamics.state import SimState, StepParams
from src.dynamics.stepper import step_rk4
from src.elliptic.slab import LayeredField3D, SlabGrid
from src.exceptions import ExponentError, WeakFormError
from src.spectral.grid import (
    SpectralField2D, TorusGrid, hermitian_defect, homogeneous_sobolev_norm, random_band_limited,
)
from src.spectral.mollifier import Mollifier
from src.verification.checks import (
    calibration_ratios, check_calibrated_bound, check_determinism, check_equivalence, check_hodge,
    check_prepare_data, check_regularity_fits, refinement_residuals, short_trajectory,
)


def _sqg_state(n=32, kmax=4, seed=0):
    slab = SlabGrid(TorusGrid(n), 16)
    theta = random_band_limited(slab.torus, kmax, np.random.default_rng(seed))
    return SimState(0.0, theta, LayeredField3D.zeros(slab))


def _record(t, energy_value, lp=1.0, forcing=None):
    return DiagnosticsRecord(
        t=t, energy=energy_value, hamiltonian=energy_value, flux=0.0,
        lp_theta={2.0: lp}, lq_omega={2.0: 0.0}, besov={0.6: 1.0},
        forcing_norms=forcing or {},
    )


class TestEnergy(unittest.TestCase):

    def test_single_mode_hamiltonian(self):
        grid = TorusGrid(16)
        theta = SpectralField2D.from_function(grid, lambda x1, x2: np.cos(x1))
        self.assertAlmostEqual(hamiltonian(theta), 2 * math.pi ** 2, places=10)
        print("✅ Test passed: H(cos x1) = 2 pi^2")

    def test_energy_equals_hamiltonian_without_vorticity(self):
        state = _sqg_state(n=16)
        self.assertEqual(energy(state), hamiltonian(state.theta))
        self.assertEqual(omega_norm(state), 0.0)
        print("✅ Test passed: E = H when omega = 0")

    def test_energy_matches_slab_quadrature(self):
        """Trapezoid of |grad Psi|^2 on a fine slab plus the harmonic tail above z = h."""
        slab = SlabGrid(TorusGrid(16), 256)
        grid = slab.torus
        theta = random_band_limited(grid, 2, np.random.default_rng(4))
        h = slab.h
        vorticity = LayeredField3D.from_function(
            slab, lambda z, x1, x2: np.sin(np.pi * z / h) ** 2 * (np.cos(x1) + 0.5 * np.sin(2 * x2)))
        for omega in (LayeredField3D.zeros(slab), vorticity):
            state = SimState(0.0, theta, omega)
            gz, g1, g2 = state.split.gradient
            density = gz.values ** 2 + g1.values ** 2 + g2.values ** 2
            per_level = density.sum(axis=(1, 2)) * grid.dx ** 2
            tail = grid.area * float(np.sum(grid.kmag * np.abs(state.split.psi_coeffs[-1]) ** 2))
            brute = float(np.sum(slab.z_weights * per_level)) + tail
            self.assertLess(abs(energy(state) - brute) / brute, 2e-3)
        print(f"✅ Test passed: E = {energy(state):.6f}, quadrature {brute:.6f}")

    def test_energy_is_quadratic(self):
        cfg = RunConfig(n=16, nz=16, t_final=0.0, initial='qg_smooth', kmax=2)
        state = initial_state(cfg, build_slab(cfg))
        scaled = SimState(0.0, state.theta * 3.0, state.omega * 3.0)
        self.assertAlmostEqual(energy(scaled) / energy(state), 9.0, places=10)
        print("✅ Test passed: E(3 theta, 3 omega) = 9 E(theta, omega)")

    def test_energy_drift_shrinks_with_levels(self):
        drifts = []
        for nz in (16, 32, 64):
            cfg = RunConfig(n=16, nz=nz, t_final=0.2, initial='qg_smooth', kmax=2, amplitude=0.5)
            state = initial_state(cfg, build_slab(cfg))
            out = state
            for _ in range(20):
                out = step_rk4(out, StepParams(dt=0.01))
            drifts.append(abs(energy(out) - energy(state)) / energy(state))
        self.assertGreater(drifts[0] / drifts[1], 2.0)
        self.assertGreater(drifts[1] / drifts[2], 2.0)
        print(f"✅ Test passed: energy drift {[f'{d:.2e}' for d in drifts]} at nz = 16, 32, 64")

    def test_lp_dissipation(self):
        theta = random_band_limited(TorusGrid(32), 6, np.random.default_rng(1))
        quadratic = lp_dissipation_integral(theta, 2)
        expected = homogeneous_sobolev_norm(theta, 0.5) ** 2
        self.assertAlmostEqual(quadratic / expected, 1.0, places=10)
        wave = SpectralField2D.from_function(TorusGrid(32), lambda x1, x2: np.cos(x1))
        self.assertGreater(lp_dissipation_integral(wave, 4), 0.0)
        print(f"✅ Test passed: int theta Lambda theta = ||theta||^2 in H^1/2 ({quadratic:.6f})")


class TestFlux(unittest.TestCase):

    def test_single_mode_has_no_flux(self):
        slab = SlabGrid(TorusGrid(32), 16)
        theta = SpectralField2D.from_function(slab.torus, lambda x1, x2: np.cos(2 * x1))
        state = SimState(0.0, theta, LayeredField3D.zeros(slab))
        flux = onsager_flux(state, Mollifier(4 * slab.torus.dx))
        self.assertLess(abs(flux), 1e-10)
        print(f"✅ Test passed: shear flow flux {flux:.2e}")

    def test_cubic_scaling(self):
        state = _sqg_state()
        doubled = SimState(0.0, state.theta * 2.0, state.omega)
        gamma = Mollifier(4 * state.slab.torus.dx)
        base = onsager_flux(state, gamma)
        scaled = onsager_flux(doubled, gamma)
        self.assertLess(abs(scaled - 8 * base), 1e-8 * max(abs(base), 1e-12) * 8 + 1e-14)
        print(f"✅ Test passed: flux(2 theta) = 8 flux(theta), base {base:.4e}")

    def test_flux_decays_quadratically(self):
        state = _sqg_state(n=256, kmax=2)
        slope, fluxes = flux_decay_slope(state, (2, 4, 8))
        self.assertTrue(all(abs(f) > 0 for f in fluxes))
        self.assertGreaterEqual(slope, 1.9)
        print(f"✅ Test passed: |flux| ~ eps^{slope:.3f}, fluxes {[f'{f:.2e}' for f in fluxes]}")


class TestTestFunctions(unittest.TestCase):

    def test_profiles(self):
        spec = TestFunctionSpec('interior', (1.0, 2.0), 0.8, 0.5, math.pi)
        p, _ = spec.vertical([0.0, math.pi, 4.0])
        self.assertLess(float(np.max(np.abs(p))), 1e-14)
        closure = TestFunctionSpec('closure', (1.0, 2.0), 0.8, 0.5, math.pi)
        self.assertAlmostEqual(float(closure.vertical(0.0)[0]), 1.0)
        self.assertEqual(spec.temporal(0.5), (0.0, 0.0))
        self.assertAlmostEqual(spec.temporal(0.0)[0], 1.0)
        self.assertLess(hermitian_defect(spec.horizontal_coeffs(TorusGrid(16)), TorusGrid(16)), 1e-14)
        with self.assertRaises(ValueError):
            TestFunctionSpec('edge', (0.0, 0.0), 0.8, 0.5, math.pi)
        with self.assertRaises(ValueError):
            TestFunctionSpec('surface', (0.0, 0.0), 0.0, 0.5, math.pi)
        print("✅ Test passed: compact in z and t, real in x")

    def test_suite_is_seeded(self):
        slab = SlabGrid(TorusGrid(16), 16)
        first = test_function_suite(slab, 1.0, 'closure', count=5, seed=3)
        again = test_function_suite(slab, 1.0, 'closure', count=5, seed=3)
        self.assertEqual(first, again)
        l = slab.torus.l
        self.assertTrue(all(l / 12 <= spec.width <= l / 6 for spec in first))
        print("✅ Test passed: seeded suite, widths in [l/12, l/6]")


class TestWeakForms(unittest.TestCase):

    def test_trajectory_checks(self):
        state = _sqg_state(n=16)
        with self.assertRaises(WeakFormError):
            check_trajectory([state])
        uneven = [state, SimState(0.1, state.theta, state.omega), SimState(0.3, state.theta, state.omega)]
        with self.assertRaises(WeakFormError):
            check_trajectory(uneven)
        print("✅ Test passed: >= 2 snapshots at a uniform cadence")

    def test_quadrature_and_normalization(self):
        ts = np.linspace(0.0, 1.0, 5)
        self.assertEqual(Config.TIME_QUADRATURE, 'simpson')
        self.assertAlmostEqual(time_integral(ts ** 2, ts), 1.0 / 3.0, places=14)
        self.assertEqual(normalized_residual([1.0, -1.0]), 0.0)
        self.assertEqual(normalized_residual([0.0, 0.0]), 0.0)
        self.assertAlmostEqual(normalized_residual([2.0, -1.0]), 1.0 / 3.0)
        print("✅ Test passed: Simpson exact on t^2, |sum| / sum |.|")

    def test_sqg_boundary_residual(self):
        trajectory = short_trajectory(_sqg_state())
        slab = trajectory[0].slab
        t_final = trajectory[-1].t
        interior = test_function_suite(slab, t_final, 'interior', count=2)
        surface = test_function_suite(slab, t_final, 'surface', count=2)
        for phi, phi_bar in zip(interior, surface):
            r_interior, r_boundary = weak_residual_qg(trajectory, phi, phi_bar)
            self.assertEqual(r_interior, 0.0)
            self.assertLess(r_boundary, 1e-5)
        print(f"✅ Test passed: SQG boundary residual {r_boundary:.2e}")

    def test_forced_interior_residual(self):
        slab = SlabGrid(TorusGrid(16), 16)
        forcing = ForcingSpec(f_L=interior_mode_forcing(slab, 0.5, 1.5, mode=(1, 1)))
        params = StepParams(dt=0.01)
        trajectory = [SimState(0.0, SpectralField2D.zeros(slab.torus), LayeredField3D.zeros(slab))]
        for _ in range(40):
            trajectory.append(step_rk4(trajectory[-1], params, forcing))
        phi = TestFunctionSpec('interior', (0.5, 0.5), 1.0, trajectory[-1].t, slab.h)
        terms = interior_terms(trajectory, phi, forcing, params)
        self.assertGreater(abs(terms[2]), 1e-6)
        residual = normalized_residual(terms)
        self.assertLess(residual, 1e-4)
        print(f"✅ Test passed: forced interior residual {residual:.2e}")


class TestEquivalence(unittest.TestCase):

    def test_report_by_hand(self):
        rows = [
            EquivalenceRow(0, 'closure', {'rqg': 1e-9, 'qg': 2e-9, 'qg_commutator': 1.5e-9}),
            EquivalenceRow(1, 'closure', {'rqg': 3e-9, 'qg': 3e-9, 'qg_commutator': 3e-9}),
        ]
        report = EquivalenceReport(rows, tolerance=1e-6, flag_threshold=2.5e-9)
        self.assertTrue(report.passed)
        self.assertEqual(report.worst, {'rqg': 3e-9, 'qg': 3e-9, 'qg_commutator': 3e-9})
        self.assertTrue(all(report.flagged.values()))
        self.assertAlmostEqual(rows[0].max_difference, 1e-9)
        exported = report.to_rows()
        self.assertEqual(exported[1]['index'], 1)
        self.assertIn('rqg-qg', exported[0])
        print("✅ Test passed: pairwise differences, worst and flags")

    def test_short_trajectory_equivalence(self):
        results = check_equivalence(short_trajectory(_sqg_state()))
        for result in results:
            self.assertTrue(result.passed, f"{result.name}: {result.value} {result.detail}")
        print(f"✅ Test passed: {results[0].detail}")

    def test_report_matches_single_residuals(self):
        trajectory = short_trajectory(_sqg_state())
        slab = trajectory[0].slab
        suite = test_function_suite(slab, trajectory[-1].t, 'closure', count=2)
        report = equivalence_report(trajectory, suite)
        self.assertEqual(len(report.rows), 2)
        self.assertTrue(report.passed)
        for row, phi in zip(report.rows, suite):
            self.assertEqual(row.kind, 'closure')
            self.assertEqual(row.residuals['rqg'], weak_residual_rqg(trajectory, phi))

        surface = test_function_suite(slab, trajectory[-1].t, 'surface', count=2)
        interior = test_function_suite(slab, trajectory[-1].t, 'interior', count=2)
        for phi, phi_bar in zip(interior, surface):
            direct = weak_residual_qg(trajectory, phi, phi_bar)
            commutator = weak_residual_qg_commutator(trajectory, phi, phi_bar)
            self.assertEqual(direct[0], commutator[0])
            self.assertLess(abs(direct[1] - commutator[1]), 1e-6)
        print("✅ Test passed: report rows agree with the single-form residuals")


class TestMonitor(unittest.TestCase):

    def test_series_helpers(self):
        self.assertAlmostEqual(relative_drift([2.0, 2.2, 1.9]), 0.1)
        self.assertAlmostEqual(relative_drift([0.0, 0.3, -0.1]), 0.3)
        self.assertEqual(count_increases([1.0, 2.0, 1.5, 3.0], 0.0), 2)
        self.assertEqual(count_increases([1.0, 1.0 + 1e-12], 1e-8), 0)
        print("✅ Test passed: drift and increase counting")

    def test_bound_ratios(self):
        records = [_record(0.0, 1.0, forcing={'f_L': 1.0, 'f_nu': 1.0}),
                   _record(1.0, 1.0, lp=3.0, forcing={'f_L': 1.0, 'f_nu': 1.0})]
        ratios = bound_ratios(records)
        self.assertEqual(ratios[0], 1.0)
        self.assertAlmostEqual(ratios[1], 1.0)
        zero = [_record(0.0, 0.0, lp=0.0), _record(1.0, 0.0, lp=0.0)]
        self.assertEqual(bound_ratios(zero), [0.0, 0.0])
        print("✅ Test passed: norms over data plus forcing budget")

    def test_bound_ratios_include_energy(self):
        records = [_record(0.0, 100.0), _record(0.5, 400.0)]
        ratios = bound_ratios(records)
        self.assertEqual(ratios[0], 1.0)
        self.assertAlmostEqual(ratios[1], 21.0 / 11.0, places=12)
        print(f"✅ Test passed: gradient norm 10 -> 20 moves the ratio to {ratios[1]:.4f}")

    def test_conservation_monitor(self):
        records = [_record(0.1 * i, 5.0) for i in range(4)]
        report = conservation_monitor(records, MonitorParams(bound_constant=2.0))
        self.assertTrue(report.conserves_energy)
        self.assertTrue(report.conserves_hamiltonian)
        self.assertTrue(report.lp_monotone)
        self.assertEqual(report.bound_margin, 1.0)
        self.assertTrue(report.bound_holds)
        self.assertEqual(report.besov_series, {0.6: [1.0] * 4})

        growing = [_record(0.0, 5.0, lp=1.0), _record(0.1, 5.5, lp=2.0)]
        report = conservation_monitor(growing)
        self.assertFalse(report.conserves_energy)
        self.assertEqual(report.energy_increases, 1)
        self.assertEqual(report.lp_violations, {2.0: 1})
        self.assertIsNone(report.bound_holds)
        with self.assertRaises(ValueError):
            conservation_monitor(records[:1])
        print("✅ Test passed: conservation report")


class TestRecords(unittest.TestCase):

    def test_row_round_trip(self):
        record = DiagnosticsRecord(
            t=0.25, energy=1.5, hamiltonian=1.25, flux=-3e-7,
            lp_theta={2.0: 0.5, 4.0: 0.75}, lq_omega={2.0: 0.0},
            besov={0.4: 1.0}, besov_surface={0.4: 2.0},
            residuals={'neumann': 1e-15}, forcing_norms={'f_L': 0.1},
        )
        row = {key: repr(value) for key, value in record.as_row().items()}
        self.assertIn('lp_theta[4.0]', row)
        self.assertEqual(DiagnosticsRecord.from_row(row), record)
        with self.assertRaises(ValueError):
            DiagnosticsRecord(t=0.0, energy=math.nan, hamiltonian=0.0, flux=0.0)
        print("✅ Test passed: CSV row round trip, non-finite rejected")

    def test_settings(self):
        with self.assertRaises(ExponentError):
            DiagnosticSettings(alphas=(1.0,))
        with self.assertRaises(ExponentError):
            DiagnosticSettings(p_ladder=(0.5,))
        settings = DiagnosticSettings()
        self.assertAlmostEqual(settings.mollifier(TorusGrid(16)).eps, 2 * math.pi / 8)
        self.assertAlmostEqual(settings.mollifier(TorusGrid(64)).eps, 4 * 2 * math.pi / 64)
        self.assertEqual(DiagnosticSettings(mollifier_eps=0.3).mollifier(TorusGrid(64)).eps, 0.3)
        print("✅ Test passed: exponent windows and default mollifier width")

    def test_compute_record(self):
        state = _sqg_state(n=16)
        record = compute_record(state)
        self.assertEqual(record.energy, record.hamiltonian)
        self.assertEqual(sorted(record.lp_theta), [2.0, 3.0, 4.0])
        self.assertEqual(record.forcing_norms, {})
        self.assertLess(record.residuals['neumann'], 1e-12)
        self.assertEqual(record.residuals['laplacian'], 0.0)
        self.assertLess(abs(record.lp_theta[2.0] / state.theta.l2_norm() - 1.0), 1e-12)
        print(f"✅ Test passed: record at t=0, flux {record.flux:.3e}")


class TestCalibration(unittest.TestCase):

    def test_calibrated_constant(self):
        self.assertEqual(calibrated_constant([0.5, 1.0]), Config.CALIBRATION_FACTOR)
        self.assertEqual(calibrated_constant([0.5, 1.0], factor=3.0), 3.0)
        for bad in (lambda: calibrated_constant([]), lambda: calibrated_constant([math.nan]),
                    lambda: calibrated_constant([1.0], factor=0.5)):
            with self.assertRaises(ValueError):
                bad()
        print("✅ Test passed: factor times the largest calibration ratio")

    def test_calibrated_family_bounds_held_out_seeds(self):
        result = check_calibrated_bound(seeds=6, calibrate=3)
        self.assertTrue(result.passed, result.detail)
        ratios = calibration_ratios(0)
        self.assertEqual(ratios[0], 1.0)
        self.assertTrue(all(math.isfinite(r) and r > 0 for r in ratios))
        print(f"✅ Test passed: {result.detail}")


class TestRefinement(unittest.TestCase):

    def test_residuals_fall_under_refinement(self):
        theta = random_band_limited(TorusGrid(32), 4, np.random.default_rng(0))
        pairs = refinement_residuals(theta)
        self.assertEqual(sorted(pairs), ['qg', 'qg_commutator', 'rqg'])
        for name, (coarse, fine) in pairs.items():
            self.assertGreaterEqual(coarse / fine, 3.0, name)
        print("✅ Test passed: " + ", ".join(f"{k} {c:.1e} -> {f:.1e}" for k, (c, f) in pairs.items()))


class TestSuiteChecks(unittest.TestCase):

    def test_prepare_data_check(self):
        result = check_prepare_data((2.0, 3.0))
        self.assertTrue(result.passed, f"{result.value:.3e}")
        print(f"✅ Test passed: prepare_data deviation {result.value:.2e}")

    def test_runs_are_deterministic(self):
        result = check_determinism()
        self.assertEqual(result.value, 0.0)
        print(f"✅ Test passed: {result.detail}")

    def test_hodge_and_regularity_checks(self):
        for result in (check_hodge(count=3), check_regularity_fits((0.5,))):
            self.assertTrue(result.passed, f"{result.name}: {result.value:.3e} {result.detail}")
        print("✅ Test passed: weak divergence and regularity fits")


if __name__ == '__main__':
    print("=" * 70)
    print("TEST: Diagnostics")
    print("=" * 70)
    print()
    unittest.main(argv=[''], exit=False, verbosity=2)
