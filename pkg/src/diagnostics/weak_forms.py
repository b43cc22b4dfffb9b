"""
Space-time residuals of the three weak formulations.

Each residual is |sum of terms| / sum |terms| over the terms of one weak
identity, with time integrals over the snapshot cadence and the t = 0
term taken from the first snapshot.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import simpson, trapezoid

from src.commutator.calderon import nonlinear_flux_commutator
from src.config import Config
from src.diagnostics.test_functions import TestFunctionSpec
from src.dynamics.forcing import NO_FORCING, ForcingSpec
from src.dynamics.state import SimState, StepParams
from src.dynamics.stepper import forcing_split
from src.elliptic.slab import slab_integral
from src.exceptions import WeakFormError
from src.harmonic.operators import lambda_pow
from src.spectral.grid import PhysField2D, TorusGrid, grid_sum, to_values

Trajectory = Sequence[SimState]


def check_trajectory(trajectory: Trajectory) -> np.ndarray:
    """Snapshot times; raises WeakFormError unless >= 2 snapshots at a uniform cadence."""
    if len(trajectory) < 2:
        raise WeakFormError(f"weak residuals need at least 2 snapshots, got {len(trajectory)}")
    ts = np.array([s.t for s in trajectory], dtype=float)
    steps = np.diff(ts)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise WeakFormError("snapshot cadence is not uniform")
    return ts


def time_integral(values: Sequence[float], ts: np.ndarray) -> float:
    if Config.TIME_QUADRATURE == 'trapezoid' or len(ts) < 3:
        return float(trapezoid(values, x=ts))
    return float(simpson(values, x=ts))


def normalized_residual(terms: Sequence[float]) -> float:
    scale = sum(abs(v) for v in terms)
    if scale == 0.0:
        return 0.0
    return abs(sum(terms)) / scale


@dataclass(frozen=True, eq=False)
class _Profile:
    """Horizontal bump b and its first and second derivatives on one grid."""
    spec: TestFunctionSpec
    grid: TorusGrid

    @cached_property
    def coeffs(self) -> np.ndarray:
        return self.spec.horizontal_coeffs(self.grid)

    @cached_property
    def b(self) -> np.ndarray:
        return to_values(self.coeffs)

    @cached_property
    def db(self) -> Tuple[np.ndarray, np.ndarray]:
        g = self.grid
        return to_values(g.ik1 * self.coeffs), to_values(g.ik2 * self.coeffs)

    @cached_property
    def ddb(self) -> Tuple[Tuple[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]:
        g = self.grid
        c = self.coeffs
        d11 = to_values(g.ik1 * g.ik1 * c)
        d12 = to_values(g.ik1 * g.ik2 * c)
        d22 = to_values(g.ik2 * g.ik2 * c)
        return (d11, d12), (d12, d22)


def _boundary_data(s: SimState, f: ForcingSpec, eps: float) -> np.ndarray:
    data = f.surface(s.t, s.slab.torus)
    if eps:
        data = data - lambda_pow(1, s.theta) * eps
    return data.to_physical().values


def boundary_terms(trajectory: Trajectory, phi_bar: TestFunctionSpec, f: ForcingSpec = NO_FORCING,
                   params: Optional[StepParams] = None, commutator: bool = False) -> List[float]:
    """
    Terms of the boundary identity

        int int (d_t phi + u0 . grad phi) theta + phi (f_nu - eps Lambda theta) + int phi(0) theta0 = 0

    with phi = a(t) p(0) b(x). With commutator=True the harmonic part of the
    transport term is the Calderón commutator form.
    """
    ts = check_trajectory(trajectory)
    params = params or StepParams(dt=float(ts[1] - ts[0]))
    grid = trajectory[0].slab.torus
    prof = _Profile(phi_bar, grid)
    p0 = float(phi_bar.vertical(0.0)[0])
    b = p0 * prof.b
    b1, b2 = (p0 * d for d in prof.db)
    U1, U2 = params.sweep
    area = grid.dx ** 2

    dt_term, transport, source = [], [], []
    for s in trajectory:
        a, da = phi_bar.temporal(s.t)
        theta = s.theta.to_physical().values
        dt_term.append(da * grid_sum(b * theta) * area)
        if commutator:
            c = s.split.psi2.coeffs[0]
            w1, w2 = to_values(-grid.ik2 * c) + U1, to_values(grid.ik1 * c) + U2
            flux = nonlinear_flux_commutator(s.theta, PhysField2D(grid, b)) if p0 else 0.0
            transport.append(a * (flux + grid_sum(theta * (w1 * b1 + w2 * b2)) * area))
        else:
            u1, u2 = s.split.surface_velocity
            transport.append(a * grid_sum(theta * ((u1 + U1) * b1 + (u2 + U2) * b2)) * area)
        source.append(a * grid_sum(b * _boundary_data(s, f, params.eps_diss)) * area)

    a0, _ = phi_bar.temporal(trajectory[0].t)
    initial = a0 * grid_sum(b * trajectory[0].theta.to_physical().values) * area
    return [time_integral(dt_term, ts), time_integral(transport, ts), time_integral(source, ts), initial]


def interior_terms(trajectory: Trajectory, phi: TestFunctionSpec, f: ForcingSpec = NO_FORCING,
                   params: Optional[StepParams] = None) -> List[float]:
    """
    Terms of the interior identity

        int int (d_t phi + u . grad phi) omega + phi f_L + int phi(0) omega0 = 0

    on the slab levels (trapezoid in z).
    """
    ts = check_trajectory(trajectory)
    params = params or StepParams(dt=float(ts[1] - ts[0]))
    slab = trajectory[0].slab
    prof = _Profile(phi, slab.torus)
    p, _ = phi.vertical(slab.levels)
    pb = p[:, None, None] * prof.b[None]
    pb1, pb2 = (p[:, None, None] * d[None] for d in prof.db)
    U1, U2 = params.sweep

    dt_term, transport, source = [], [], []
    for s in trajectory:
        a, da = phi.temporal(s.t)
        omega = s.omega.values
        if np.any(omega):
            u1, u2 = s.split.horizontal_velocity
            dt_term.append(da * slab_integral(slab, pb * omega))
            transport.append(a * slab_integral(slab, omega * ((u1 + U1) * pb1 + (u2 + U2) * pb2)))
        else:
            dt_term.append(0.0)
            transport.append(0.0)
        if f.f_L is not None:
            source.append(a * slab_integral(slab, pb * f.interior(s.t, slab).values))
        else:
            source.append(0.0)

    a0, _ = phi.temporal(trajectory[0].t)
    initial = a0 * slab_integral(slab, pb * trajectory[0].omega.values)
    return [time_integral(dt_term, ts), time_integral(transport, ts), time_integral(source, ts), initial]


def _gradient_pairing(dp, p, b, db, grad) -> np.ndarray:
    """Pointwise p' b dz G + p (b1 d1 G + b2 d2 G) at every node, shape (nodes, n, n)."""
    gz, g1, g2 = grad
    return (dp[:, None, None] * b[None] * gz
            + p[:, None, None] * (db[0][None] * g1 + db[1][None] * g2))


def rqg_terms(trajectory: Trajectory, phi: TestFunctionSpec, f: ForcingSpec = NO_FORCING,
              params: Optional[StepParams] = None) -> List[float]:
    """
    Terms of the gradient-tested identity

        int int (d_t grad phi + u . grad_h grad phi) . grad Psi + grad phi . grad F
            + int grad phi(0) . grad Psi(0) = 0

    Vertical integrals use Gauss-Legendre nodes on [0, h].
    """
    ts = check_trajectory(trajectory)
    params = params or StepParams(dt=float(ts[1] - ts[0]))
    slab = trajectory[0].slab
    grid = slab.torus
    prof = _Profile(phi, grid)
    x, w = leggauss(Config.VERTICAL_NODES)
    z = 0.5 * slab.h * (x + 1)
    wz = 0.5 * slab.h * w
    p, dp = phi.vertical(z)
    area = grid.dx ** 2
    U = params.sweep
    with_forcing = not f.is_zero or params.eps_diss > 0

    def pair(grad) -> float:
        per_node = _gradient_pairing(dp, p, prof.b, prof.db, grad)
        return float(np.dot(wz, [grid_sum(v) for v in per_node])) * area

    dt_term, transport, source = [], [], []
    initial = 0.0
    for index, s in enumerate(trajectory):
        a, da = phi.temporal(s.t)
        _, grad = s.split.evaluate(z)
        dt_term.append(da * pair(grad))

        u = (-grad[2] + U[0], grad[1] + U[1])
        adv = 0.0
        for ua, dba, ddba in zip(u, prof.db, prof.ddb):
            per_node = _gradient_pairing(dp, p, dba, ddba, grad)
            adv += float(np.dot(wz, [grid_sum(ua_z * v) for ua_z, v in zip(ua, per_node)]))
        transport.append(a * adv * area)

        if with_forcing:
            _, grad_f = forcing_split(s, f, params).evaluate(z)
            source.append(a * pair(grad_f))
        else:
            source.append(0.0)
        if index == 0:
            initial = a * pair(grad)
    return [time_integral(dt_term, ts), time_integral(transport, ts), time_integral(source, ts), initial]


def weak_residual_rqg(trajectory: Trajectory, phi: TestFunctionSpec, f: ForcingSpec = NO_FORCING,
                      params: Optional[StepParams] = None) -> float:
    return normalized_residual(rqg_terms(trajectory, phi, f, params))


def weak_residual_qg(trajectory: Trajectory, phi: TestFunctionSpec, phi_bar: TestFunctionSpec,
                     f: ForcingSpec = NO_FORCING, params: Optional[StepParams] = None) -> Tuple[float, float]:
    """(interior residual, boundary residual) with the direct transport term."""
    return (normalized_residual(interior_terms(trajectory, phi, f, params)),
            normalized_residual(boundary_terms(trajectory, phi_bar, f, params)))


def weak_residual_qg_commutator(trajectory: Trajectory, phi: TestFunctionSpec, phi_bar: TestFunctionSpec,
                                f: ForcingSpec = NO_FORCING,
                                params: Optional[StepParams] = None) -> Tuple[float, float]:
    """As weak_residual_qg with the commutator form for the harmonic boundary flux."""
    return (normalized_residual(interior_terms(trajectory, phi, f, params)),
            normalized_residual(boundary_terms(trajectory, phi_bar, f, params, commutator=True)))


def combined_qg_residual(interior: Sequence[float], boundary: Sequence[float]) -> float:
    """Residual of -interior + boundary: the gradient-tested identity after integration by parts."""
    return normalized_residual([-v for v in interior] + list(boundary))
