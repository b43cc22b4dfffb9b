"""
Invariant and identity checks run by the verify subcommand.

Grid-independent checks use fixed small grids; the rest run on the
configured initial state over a short horizon.
"""
import math
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.commutator.calderon import flux_mismatch
from src.commutator.littlewood_paley import lacunary_field, regularity_slopes
from src.commutator.mollifier_identities import mollifier_adjoint_check, mollifier_commutator_check
from src.config import Config, RunConfig
from src.diagnostics.calibration import calibrated_constant
from src.diagnostics.energy import energy, hamiltonian
from src.diagnostics.equivalence import equivalence_report
from src.diagnostics.flux import flux_decay_slope
from src.diagnostics.monitor import bound_ratios
from src.diagnostics.records import strong_residuals
from src.diagnostics.test_functions import test_function_suite
from src.dynamics.initial_data import initial_state
from src.dynamics.runner import build_slab, run
from src.dynamics.state import SimState, StepParams
from src.dynamics.stepper import cfl_dt, step_rk4
from src.elliptic.hodge import hodge_project
from src.elliptic.slab import LayeredField3D, SlabGrid, slab_inner
from src.elliptic.solvers import gradient, solve_psi1, solve_psi2
from src.harmonic.operators import lambda_pow, poisson_extend, riesz, riesz_perp
from src.spectral.data_prep import prepare_data
from src.spectral.grid import (
    PhysField2D, SpectralField2D, TorusGrid, forward_transform, random_band_limited, zero_pad,
)
from src.spectral.mollifier import Mollifier, mollify_array
from src.storage.snapshot_store import decode_snapshot, encode_snapshot
from src.tracking.diagnostics_logger import export_diagnostics
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

SHORT_STEPS = 40
SHORT_DT = 0.005
FAULT_SIZE = 1e-3

# Relative drifts below this are round-off; rates are not fitted to them
DRIFT_FLOOR = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    detail: str = ''

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.threshold


def _max_abs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def check_operators() -> CheckResult:
    """Single-mode closed forms and R1^2 + R2^2 = -I on a band-limited field."""
    grid = TorusGrid(64)
    x1, x2 = grid.coordinates
    k1, k2 = 3.0, 2.0
    kk = math.hypot(k1, k2)
    phase = k1 * x1 + k2 * x2
    theta = SpectralField2D.from_function(grid, lambda a, b: np.cos(k1 * a + k2 * b))

    errors = [
        _max_abs(lambda_pow(1, theta).to_physical().values, kk * np.cos(phase)),
        _max_abs(lambda_pow(-1, theta).to_physical().values, np.cos(phase) / kk),
        _max_abs(riesz(1, theta).to_physical().values, k1 / kk * np.sin(phase)),
        _max_abs(riesz(2, theta).to_physical().values, k2 / kk * np.sin(phase)),
        _max_abs(poisson_extend(theta, 0.5).to_physical().values, math.exp(-0.5 * kk) * np.cos(phase)),
    ]
    field = random_band_limited(grid, 16, np.random.default_rng(0))
    square = riesz(1, riesz(1, field)) + riesz(2, riesz(2, field))
    errors.append(_max_abs(square.coeffs, -field.coeffs) / float(np.max(np.abs(field.coeffs))))
    return CheckResult('operators', max(errors), 1e-12, 'Lambda^{+-1}, R1, R2, Poisson, R1^2+R2^2')


def check_commutator_identity(families: int = 50, seed: int = 0) -> CheckResult:
    """Direct nonlinear flux = -commutator flux on seeded band-limited data."""
    grid = TorusGrid(64)
    slab = SlabGrid(grid, 16)
    rng = np.random.default_rng(seed)
    suite = test_function_suite(slab, 1.0, 'surface', count=8, seed=seed)
    worst = 0.0
    for _ in range(families):
        theta = random_band_limited(grid, 8, rng)
        for spec in suite:
            phi = spec.horizontal(grid).to_physical()
            worst = max(worst, flux_mismatch(theta, phi))
    return CheckResult('commutator_identity', worst, 1e-9, f"{families} fields x {len(suite)} test functions")


def check_mollifier_identities() -> CheckResult:
    grid = TorusGrid(64)
    rng = np.random.default_rng(1)
    f = random_band_limited(grid, 6, rng).to_physical()
    g = random_band_limited(grid, 6, rng).to_physical()
    gamma = Mollifier(8 * grid.dx)
    commutator = mollifier_commutator_check(f, g, gamma).deviation
    adjoint = mollifier_adjoint_check(f, g, gamma).deviation
    return CheckResult('mollifier_identities', max(commutator, adjoint), 1e-8, 'eps = 8 dx')


def psi2_manufactured_error(nz: int, n: int = 8) -> float:
    """Max error of the interior solve for psi = cos(x1) (1 + cos(pi z/h)) / 2."""
    slab = SlabGrid(TorusGrid(n), nz)
    w = math.pi / slab.h

    def exact(z, x1, x2):
        return np.cos(x1) * (1 + np.cos(w * z)) / 2

    def source(z, x1, x2):
        return np.cos(x1) * (-(1 + np.cos(w * z)) / 2 - w ** 2 * np.cos(w * z) / 2)

    psi = solve_psi2(LayeredField3D.from_function(slab, source))
    return _max_abs(psi.values, LayeredField3D.from_function(slab, exact).values)


def check_elliptic() -> List[CheckResult]:
    slab = SlabGrid(TorusGrid(16), 32)
    theta = SpectralField2D.from_function(slab.torus, lambda x1, x2: np.cos(x1))
    x1 = slab.torus.coordinates[0]
    exact = np.exp(-slab.levels)[:, None, None] * np.cos(x1)[None]
    psi1_error = _max_abs(solve_psi1(theta, slab).values, exact)

    sizes = (32, 64, 128)
    errors = [psi2_manufactured_error(nz) for nz in sizes]
    dz = [1.0 / (nz - 1) for nz in sizes]
    order = float(np.polyfit(np.log(dz), np.log(errors), 1)[0])
    return [
        CheckResult('psi1_exact', psi1_error, 1e-12),
        # order check: value is the shortfall below second order
        CheckResult('psi2_order', max(1.9 - order, 0.0), 0.0, f"order {order:.3f}"),
    ]


def short_trajectory(state: SimState, steps: int = SHORT_STEPS) -> List[SimState]:
    """steps RK4 steps at min(SHORT_DT, half the CFL step), every state kept."""
    params = StepParams(dt=1.0)
    dt = min(SHORT_DT, 0.5 * cfl_dt(state, params))
    params = StepParams(dt=dt)
    trajectory = [state]
    for _ in range(steps):
        trajectory.append(step_rk4(trajectory[-1], params))
    return trajectory


def check_sqg_reduction(trajectory: List[SimState]) -> CheckResult:
    """omega stays zero and the surface velocity is -R-perp theta."""
    worst = 0.0
    for s in trajectory:
        worst = max(worst, float(np.max(np.abs(s.omega.values))))
        _, r1, r2 = riesz_perp(s.theta)
        u1, u2 = s.split.surface_velocity
        worst = max(worst, _max_abs(u1, -r1.to_physical().values), _max_abs(u2, -r2.to_physical().values))
    return CheckResult('sqg_reduction', worst, 1e-10, f"{len(trajectory)} snapshots")


def check_hamiltonian(trajectory: List[SimState]) -> CheckResult:
    h0 = hamiltonian(trajectory[0].theta)
    drift = max(abs(hamiltonian(s.theta) - h0) for s in trajectory)
    return CheckResult('hamiltonian_conservation', drift / h0 if h0 else drift, 1e-6)


def check_strong_residuals(state: SimState) -> CheckResult:
    res = strong_residuals(state)
    return CheckResult('split_consistency', max(res['neumann'], res['divergence']), 1e-10,
                       ', '.join(f"{k}={v:.2e}" for k, v in res.items()))


def perturb(state: SimState, size: float = FAULT_SIZE, seed: int = 7) -> SimState:
    """state with theta + size * (a random field of rms max(rms theta, 1))."""
    grid = state.slab.torus
    rms = state.theta.l2_norm() / grid.l
    noise = random_band_limited(grid, 4, np.random.default_rng(seed), max(rms, 1.0))
    return SimState(state.t, state.theta + noise * size, state.omega)


def check_equivalence(trajectory: List[SimState]) -> List[CheckResult]:
    """Three weak formulations agree; a single corrupted snapshot is flagged by each."""
    slab = trajectory[0].slab
    suite = test_function_suite(slab, trajectory[-1].t, 'closure', count=4)
    clean = equivalence_report(trajectory, suite)
    threshold = max(10 * max(clean.worst.values()), 1e-12)

    corrupted = list(trajectory)
    middle = len(corrupted) // 2 | 1  # odd index: Simpson weight 4h/3
    corrupted[middle] = perturb(corrupted[middle])
    faulty = equivalence_report(corrupted, suite, flag_threshold=threshold)
    missed = [name for name, hit in faulty.flagged.items() if not hit]
    return [
        CheckResult('equivalence', max(row.max_difference for row in clean.rows), clean.tolerance,
                    ', '.join(f"{k}={v:.2e}" for k, v in clean.worst.items())),
        CheckResult('fault_injection', float(len(missed)), 0.0,
                    f"undetected by {', '.join(missed)}" if missed else 'detected by all formulations'),
    ]


def check_snapshot_roundtrip(state: SimState) -> CheckResult:
    data = encode_snapshot(state)
    again = encode_snapshot(decode_snapshot(data))
    return CheckResult('snapshot_roundtrip', 0.0 if again == data else 1.0, 0.0)


def energy_drift_order(state: SimState, steps: int = 24, fraction: float = 0.6) -> Tuple[float, float]:
    """
    Relative energy drift after steps RK4 steps at fraction of the CFL step,
    and after 2 * steps at half that step.
    """
    e0 = energy(state)
    if e0 == 0.0:
        return 0.0, 0.0
    dt = fraction * cfl_dt(state, StepParams(dt=1.0))
    drifts = []
    for count, step in ((steps, dt), (2 * steps, dt / 2)):
        params = StepParams(dt=step)
        s = state
        for _ in range(count):
            s = step_rk4(s, params)
        drifts.append(abs(energy(s) - e0) / e0)
    return drifts[0], drifts[1]


def check_energy_drift(state: SimState) -> List[CheckResult]:
    coarse, fine = energy_drift_order(state)
    results = [CheckResult('energy_drift', coarse, 1e-6, "24 steps at 0.6 CFL")]
    if coarse < DRIFT_FLOOR:
        results.append(CheckResult('energy_drift_order', 0.0, 0.0, f"drift {coarse:.1e} at round-off"))
    else:
        order = math.log2(coarse / fine) if fine > 0 else math.inf
        # value is the shortfall below fourth order
        results.append(CheckResult('energy_drift_order', max(3.5 - order, 0.0), 0.0,
                                   f"drift {coarse:.2e} -> {fine:.2e}, order {order:.2f}"))
    return results


def lp_increase(state: SimState, eps_diss: float = 0.1, steps: int = 20,
                ps: Sequence[float] = (2.0, 3.0, 4.0)) -> Dict[float, float]:
    """Largest one-step relative increase of ||theta||_p under boundary dissipation eps_diss."""
    dt = min(2 * SHORT_DT, 0.5 * cfl_dt(state, StepParams(dt=1.0)))
    params = StepParams(dt=dt, eps_diss=eps_diss)
    norms = [[state.theta.to_physical().lp_norm(p) for p in ps]]
    s = state
    for _ in range(steps):
        s = step_rk4(s, params)
        norms.append([s.theta.to_physical().lp_norm(p) for p in ps])
    series = np.array(norms)
    worst = {}
    for j, p in enumerate(ps):
        before, after = series[:-1, j], series[1:, j]
        safe = np.where(before > 0, before, 1.0)
        worst[p] = float(max(np.max((after - before) / safe), 0.0))
    return worst


def check_lp_monotone(state: SimState) -> CheckResult:
    worst = lp_increase(state)
    return CheckResult('lp_monotone', max(worst.values()), 1e-8,
                       ', '.join(f"p={p:g}: {v:.1e}" for p, v in worst.items()))


def interior_lq_rate(trajectory: List[SimState], qs: Sequence[float] = (2.0,)) -> Dict[float, float]:
    """max_t | ||omega(t)||_q - ||omega(0)||_q | / (||omega(0)||_q t_final) for unforced runs."""
    first = trajectory[0].omega
    span = trajectory[-1].t - trajectory[0].t
    rates = {}
    for q in qs:
        base = first.lp_norm(q)
        change = max(abs(s.omega.lp_norm(q) - base) for s in trajectory)
        rates[q] = change / (base * span) if base > 0 and span > 0 else 0.0
    return rates


def refinement_residuals(theta: SpectralField2D, nz: int = 16, steps: int = 20,
                         count: int = 4) -> Dict[str, Tuple[float, float]]:
    """
    Worst weak residual per formulation on an SQG run and on its refinement
    (n doubled by zero padding, dt halved, twice the steps).

    Returns:
        {formulation: (coarse, fine)}
    """
    coarse_slab = SlabGrid(theta.grid, nz)
    coarse = SimState(0.0, theta, LayeredField3D.zeros(coarse_slab))
    dt = min(2 * SHORT_DT, 0.5 * cfl_dt(coarse, StepParams(dt=1.0)))
    fine_theta = zero_pad(theta, 2 * theta.grid.n)
    fine = SimState(0.0, fine_theta, LayeredField3D.zeros(SlabGrid(fine_theta.grid, nz, coarse_slab.h)))

    suite = test_function_suite(coarse_slab, steps * dt, 'closure', count=count)
    worst = []
    for s, step, count_steps in ((coarse, dt, steps), (fine, dt / 2, 2 * steps)):
        params = StepParams(dt=step)
        trajectory = [s]
        for _ in range(count_steps):
            trajectory.append(step_rk4(trajectory[-1], params))
        worst.append(equivalence_report(trajectory, suite).worst)
    return {name: (worst[0][name], worst[1][name]) for name in worst[0]}


def check_refinement(theta: SpectralField2D) -> CheckResult:
    pairs = refinement_residuals(theta)
    # value is 3 fine / coarse: each residual must fall at least 3x
    ratios = [3 * fine / coarse if coarse > DRIFT_FLOOR else 0.0 for coarse, fine in pairs.values()]
    return CheckResult('residual_refinement', max(ratios), 1.0,
                       ', '.join(f"{k}={c:.1e}->{f:.1e}" for k, (c, f) in pairs.items()))


def check_regularity_fits(alphas: Sequence[float]) -> CheckResult:
    """Translation and mollified-gradient slopes on lacunary fields, within 0.1 of alpha and alpha - 1."""
    grid = TorusGrid(1024)
    shifts = [2.0 ** -k for k in (3, 4, 5, 6)]
    widths = [m * grid.dx for m in (4, 8, 16, 32)]
    shortfall, details = 0.0, []
    for alpha in alphas:
        translation, gradient = regularity_slopes(lacunary_field(grid, alpha), shifts, widths)
        shortfall = max(shortfall, alpha - 0.1 - translation, gradient - (alpha - 0.9))
        details.append(f"alpha={alpha:g}: {translation:.3f}/{gradient:.3f}")
    return CheckResult('regularity_fits', max(shortfall, 0.0), 0.0, ', '.join(details))


def check_flux_slope() -> CheckResult:
    """|flux| ~ eps^2 for smooth SQG data, eps in 2..8 dx at n = 256."""
    slab = SlabGrid(TorusGrid(256), 16)
    theta = random_band_limited(slab.torus, 2, np.random.default_rng(0))
    slope, _ = flux_decay_slope(SimState(0.0, theta, LayeredField3D.zeros(slab)), (2, 4, 8))
    return CheckResult('flux_slope', max(1.9 - slope, 0.0), 0.0, f"slope {slope:.3f}")


def check_hodge(count: int = 10, seed: int = 0) -> CheckResult:
    """int grad phi . (v - P v) vanishes for random v and random test gradients."""
    slab = SlabGrid(TorusGrid(64), 64)
    rng = np.random.default_rng(seed)
    v = tuple(LayeredField3D(slab, rng.standard_normal(slab.shape)) for _ in range(3))
    projected = hodge_project(v)
    v_norm = math.sqrt(sum(slab_inner(c, c) for c in v))
    worst = 0.0
    for _ in range(count):
        g = gradient(LayeredField3D(slab, rng.standard_normal(slab.shape)))
        g_norm = math.sqrt(sum(slab_inner(c, c) for c in g))
        gap = sum(slab_inner(gc, vc - pc) for gc, vc, pc in zip(g, v, projected))
        worst = max(worst, abs(gap) / (g_norm * v_norm))
    return CheckResult('hodge_weak_divergence', worst, 1e-6, f"{count} test gradients, n=64, nz=64")


def check_prepare_data(qs: Sequence[float]) -> CheckResult:
    """Bounded data inside the ball is only mollified; spikes are removed; L^q does not grow."""
    slab = SlabGrid(TorusGrid(64), 16)
    grid = slab.torus
    eps = 2 * grid.dx
    gamma = Mollifier(eps)
    theta = random_band_limited(grid, 4, np.random.default_rng(2), 0.5)
    values = theta.to_physical().values
    smooth = prepare_data(LayeredField3D.zeros(slab), theta, eps).theta.to_physical().values
    errors = [_max_abs(smooth, mollify_array(values, grid, gamma))]

    spike = np.zeros(grid.shape)
    spike[grid.n // 2, grid.n // 2] = 2.0 / eps
    spiked = prepare_data(LayeredField3D.zeros(slab), forward_transform(PhysField2D(grid, spike)), eps)
    errors.append(float(np.max(np.abs(spiked.theta.to_physical().values))))

    omega_raw = LayeredField3D(slab, np.random.default_rng(3).standard_normal(slab.shape))
    omega = prepare_data(omega_raw, theta, eps).omega
    errors.extend(max(omega.lp_norm(q) - omega_raw.lp_norm(q), 0.0) for q in qs)
    return CheckResult('prepare_data', max(errors), 1e-10, f"eps = 2 dx, q in {list(qs)}")


def calibration_ratios(seed: int, t_final: float = 0.2) -> List[float]:
    cfg = RunConfig(n=16, nz=16, t_final=t_final, seed=seed, forcing='surface_mode',
                    forcing_amplitude=0.5, eps_diss=0.1, dt=0.01,
                    snapshot_every=2, diagnostics_every=2)
    return bound_ratios(run(cfg).diagnostics)


def check_calibrated_bound(seeds: int = 8, calibrate: int = 4) -> CheckResult:
    """Constant calibrated on the first seeds bounds the ratios of the rest."""
    family = [max(calibration_ratios(seed)) for seed in range(seeds)]
    constant = calibrated_constant(family[:calibrate])
    held_out = max(family[calibrate:])
    return CheckResult('calibrated_bound', held_out / constant, 1.0,
                       f"C = {constant:.3f} from seeds 0-{calibrate - 1}, held-out max {held_out:.3f}")


def _run_fingerprint(cfg: RunConfig) -> Tuple[List[bytes], str]:
    result = run(cfg)
    with tempfile.TemporaryDirectory() as tmp:
        path = export_diagnostics(result.diagnostics, Path(tmp) / 'diagnostics.csv')
        table = path.read_text()
    return [encode_snapshot(s) for s in result.trajectory], table


def check_determinism() -> CheckResult:
    """Two runs of the same forced QG configuration give identical snapshots and diagnostics."""
    cfg = RunConfig(n=16, nz=16, t_final=0.04, initial='qg_smooth', kmax=3, forcing='interior_mode',
                    forcing_amplitude=0.2, eps_diss=0.05, dt=0.01)
    first, second = _run_fingerprint(cfg), _run_fingerprint(cfg)
    mismatches = sum(a != b for a, b in zip(first[0], second[0])) + (first[1] != second[1])
    return CheckResult('determinism', float(mismatches), 0.0,
                       f"fixed_order={Config.FIXED_ORDER}, {len(first[0])} snapshots")


def run_verification(cfg: RunConfig, log: Optional[Callable[[CheckResult], None]] = None) -> List[CheckResult]:
    """Every check; the configured state supplies grid and data for the dynamic ones."""
    logger.info("=" * 70)
    logger.info("VERIFICATION SUITE")
    logger.info("=" * 70)

    state = initial_state(cfg, build_slab(cfg))
    surface_only = SimState(state.t, state.theta, LayeredField3D.zeros(state.slab))
    trajectory = short_trajectory(surface_only)

    results = [check_operators(), check_commutator_identity(), check_mollifier_identities()]
    results.extend(check_elliptic())
    results.append(check_hodge())
    results.append(check_prepare_data(cfg.q_ladder))
    results.append(check_regularity_fits(cfg.alphas))
    results.append(check_flux_slope())
    results.append(check_sqg_reduction(trajectory))
    results.append(check_hamiltonian(trajectory))
    results.extend(check_energy_drift(surface_only))
    results.append(check_lp_monotone(surface_only))
    if np.any(state.omega.values):
        rate = interior_lq_rate(short_trajectory(state))[2.0]
        results.append(CheckResult('interior_l2_rate', rate, 1e-6, 'unforced, per unit time'))
    results.append(check_strong_residuals(surface_only))
    results.extend(check_equivalence(trajectory))
    results.append(check_refinement(surface_only.theta))
    results.append(check_calibrated_bound())
    results.append(check_determinism())
    results.append(check_snapshot_roundtrip(state))

    for result in results:
        mark = '✅' if result.passed else '❌'
        logger.info(f"{mark} {result.name}: {result.value:.3e} (threshold {result.threshold:.1e}) {result.detail}")
        if log is not None:
            log(result)
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"❌ {len(failed)} check(s) failed: {', '.join(failed)}")
    else:
        logger.info(f"✅ All {len(results)} checks passed")
    return results
