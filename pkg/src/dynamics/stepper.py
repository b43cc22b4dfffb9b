"""Pseudo-spectral tendencies and the integrating-factor RK4 step."""
from functools import lru_cache
from typing import NamedTuple, Tuple

import numpy as np

from src.config import Config
from src.dynamics.forcing import NO_FORCING, ForcingSpec
from src.dynamics.state import SimState, StepParams
from src.elliptic.slab import LayeredField3D, SlabGrid
from src.elliptic.solvers import EllipticSplit, get_psi2_solver, split
from src.exceptions import CFLViolation
from src.harmonic.operators import lambda_pow
from src.spectral.grid import PhysField2D, SpectralField2D, to_coeffs, to_values
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


class VelocityField(NamedTuple):
    interior: Tuple[LayeredField3D, LayeredField3D]
    surface: Tuple[PhysField2D, PhysField2D]


class QGStepper:
    """
    Right-hand side and time step for one slab.

    Works on coefficient arrays: theta (n, n) and omega (nz, n, n). The
    horizontal velocity on each level is (-d2 Psi, d1 Psi) plus the sweep;
    layers couple only through the elliptic solve.
    """

    def __init__(self, slab: SlabGrid):
        self.slab = slab
        torus = slab.torus
        self.psi2 = get_psi2_solver(slab)
        self.ik1 = torus.ik1
        self.ik2 = torus.ik2
        self.kmag = torus.kmag
        self.mask = torus.dealias_mask
        self.psi1_profile = np.exp(-torus.kmag[None] * slab.levels[:, None, None]) * torus.inv_kmag[None]

    def stream_coeffs(self, theta_c: np.ndarray, omega_c: np.ndarray) -> np.ndarray:
        psi = theta_c[None] * self.psi1_profile
        if np.any(omega_c):
            psi = psi + self.psi2.solve_coeffs(omega_c)
        return psi

    def velocities(self, theta_c, omega_c, sweep=(0.0, 0.0)):
        psi = self.stream_coeffs(theta_c, omega_c)
        return to_values(-self.ik2 * psi) + sweep[0], to_values(self.ik1 * psi) + sweep[1]

    def max_speed(self, theta_c, omega_c, sweep=(0.0, 0.0)) -> float:
        u1, u2 = self.velocities(theta_c, omega_c, sweep)
        return float(np.max(np.hypot(u1, u2)))

    def _advect(self, u1, u2, field_c, dealias: bool) -> np.ndarray:
        fx = to_values(self.ik1 * field_c)
        fy = to_values(self.ik2 * field_c)
        adv = to_coeffs(u1 * fx + u2 * fy)
        return adv * self.mask if dealias else adv

    def tendencies(self, t: float, theta_c: np.ndarray, omega_c: np.ndarray,
                   forcing: ForcingSpec, params: StepParams):
        """(d theta/dt, d omega/dt) without dissipation."""
        u1, u2 = self.velocities(theta_c, omega_c, params.sweep)
        dtheta = -self._advect(u1[0], u2[0], theta_c, params.dealias)
        if forcing.f_nu is not None:
            dtheta = dtheta + forcing.surface(t, self.slab.torus).coeffs
        dtheta[0, 0] = 0.0

        if np.any(omega_c):
            domega = -self._advect(u1, u2, omega_c, params.dealias)
        else:
            domega = np.zeros_like(omega_c, dtype=complex)
        if forcing.f_L is not None:
            domega = domega + forcing.interior(t, self.slab).coeffs
        return dtheta, domega

    def step(self, state: SimState, params: StepParams, forcing: ForcingSpec) -> SimState:
        """One integrating-factor RK4 step; exp(-eps |k| t) is applied exactly."""
        dt, t = params.dt, state.t
        theta = np.array(state.theta.coeffs)
        omega = np.array(state.omega.coeffs)
        E = np.exp(-params.eps_diss * self.kmag * dt / 2)
        E2 = E * E
        N = self.tendencies

        k1, l1 = N(t, theta, omega, forcing, params)
        k2, l2 = N(t + dt / 2, E * (theta + dt / 2 * k1), omega + dt / 2 * l1, forcing, params)
        k3, l3 = N(t + dt / 2, E * theta + dt / 2 * k2, omega + dt / 2 * l2, forcing, params)
        k4, l4 = N(t + dt, E2 * theta + dt * E * k3, omega + dt * l3, forcing, params)

        theta_new = E2 * theta + dt / 6 * (E2 * k1 + 2 * E * (k2 + k3) + k4)
        omega_new = omega + dt / 6 * (l1 + 2 * l2 + 2 * l3 + l4)
        theta_new[0, 0] = 0.0
        return SimState(
            t + dt,
            SpectralField2D(self.slab.torus, theta_new),
            LayeredField3D.from_coeffs(self.slab, omega_new),
        )


@lru_cache(maxsize=8)
def get_stepper(slab: SlabGrid) -> QGStepper:
    return QGStepper(slab)


def velocity_from_state(s: SimState, sweep=(0.0, 0.0)) -> VelocityField:
    """Horizontal velocity on every level and its trace at z = 0."""
    u1, u2 = get_stepper(s.slab).velocities(s.theta.coeffs, s.omega.coeffs, sweep)
    torus = s.slab.torus
    return VelocityField(
        interior=(LayeredField3D(s.slab, u1), LayeredField3D(s.slab, u2)),
        surface=(PhysField2D(torus, u1[0]), PhysField2D(torus, u2[0])),
    )


def rhs(s: SimState, f: ForcingSpec = NO_FORCING, params: StepParams = None):
    """Tendencies (d theta/dt, d omega/dt) excluding the dissipation term."""
    params = params or StepParams(dt=1.0)
    dtheta, domega = get_stepper(s.slab).tendencies(s.t, s.theta.coeffs, s.omega.coeffs, f, params)
    return SpectralField2D(s.slab.torus, dtheta), LayeredField3D.from_coeffs(s.slab, domega)


def _cfl_bound(s: SimState, params: StepParams) -> float:
    speed = get_stepper(s.slab).max_speed(s.theta.coeffs, s.omega.coeffs, params.sweep)
    return params.cfl * s.slab.torus.dx / max(speed, Config.VELOCITY_FLOOR)


def cfl_dt(s: SimState, params: StepParams) -> float:
    """cfl * dx / max|u| over all levels, capped at dt_cap."""
    return min(_cfl_bound(s, params), params.dt_cap)


def step_rk4(s: SimState, params: StepParams, f: ForcingSpec = NO_FORCING) -> SimState:
    """
    Advance by params.dt.

    Raises:
        CFLViolation: dt exceeds cfl * dx / max|u|
    """
    bound = _cfl_bound(s, params)
    if params.dt > bound * (1 + 1e-12):
        raise CFLViolation(params.dt, min(bound, params.dt_cap))
    return get_stepper(s.slab).step(s, params, f)


def forcing_split(s: SimState, f: ForcingSpec, params: StepParams = None) -> EllipticSplit:
    """Split of F with Delta F = f_L and d_nu F = f_nu - eps Lambda theta."""
    eps = params.eps_diss if params is not None else 0.0
    data = f.surface(s.t, s.slab.torus)
    if eps:
        data = data - lambda_pow(1, s.theta) * eps
    return split(data, f.interior(s.t, s.slab))


def solve_forcing_potential(s: SimState, f: ForcingSpec, params: StepParams = None) -> LayeredField3D:
    return forcing_split(s, f, params).psi
