"""Run orchestration: integration on a fixed output cadence with snapshots and diagnostics."""
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from src.config import Config, RunConfig
from src.diagnostics.records import DiagnosticSettings, DiagnosticsRecord, compute_record
from src.dynamics.forcing import NO_FORCING, ForcingSpec, build_forcing
from src.dynamics.initial_data import initial_state
from src.dynamics.state import SimState, StepParams
from src.dynamics.stepper import cfl_dt, get_stepper, step_rk4
from src.elliptic.slab import SlabGrid
from src.exceptions import CFLViolation, SpectralError
from src.spectral.grid import TorusGrid
from src.storage.snapshot_store import SnapshotStore
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


@dataclass
class RunResult:
    config: RunConfig
    dt: float
    params: StepParams
    forcing: ForcingSpec
    trajectory: List[SimState] = field(default_factory=list)
    diagnostics: List[DiagnosticsRecord] = field(default_factory=list)
    halted: bool = False
    reason: str = ''

    @property
    def final(self) -> SimState:
        return self.trajectory[-1]


def build_slab(cfg: RunConfig) -> SlabGrid:
    return SlabGrid(TorusGrid(cfg.n, cfg.l), cfg.nz, cfg.slab_height)


def choose_dt(cfg: RunConfig, state: SimState) -> float:
    """
    Explicit dt, or the nominal auto-CFL step: Config.CFL_SAFETY times the
    capped CFL bound at t = 0, shrunk so that the step count covers t_final
    exactly and is a multiple of snapshot_every.
    """
    if cfg.dt is not None:
        return cfg.dt
    nominal = StepParams(dt=1.0, cfl=cfg.cfl, dealias=cfg.dealias, dt_cap=cfg.dt_cap)
    bound = Config.CFL_SAFETY * cfl_dt(state, nominal)
    if cfg.t_final == 0:
        return bound
    steps = math.ceil(cfg.t_final / bound - 1e-12)
    every = cfg.snapshot_every
    steps = every * math.ceil(steps / every)
    return cfg.t_final / steps


def advance_to(state: SimState, target: float, params: StepParams,
               forcing: ForcingSpec = NO_FORCING) -> Tuple[SimState, int]:
    """
    Step from state.t to exactly target, re-splitting the remaining interval
    into equal substeps within Config.CFL_SAFETY of the current CFL bound.

    Returns:
        (state at target, number of substeps taken)
    """
    substeps = 0
    while True:
        remaining = target - state.t
        bound = Config.CFL_SAFETY * cfl_dt(state, params)
        count = max(1, math.ceil(remaining / bound - 1e-12))
        state = step_rk4(state, replace(params, dt=remaining / count), forcing)
        substeps += 1
        if count == 1:
            return state.at(target), substeps


def run(cfg: RunConfig, store: Optional[SnapshotStore] = None,
        settings: Optional[DiagnosticSettings] = None) -> RunResult:
    """
    Integrate cfg from t = 0 to t_final.

    An explicit dt is used as is. In auto mode each nominal step of
    choose_dt is reached through advance_to, so the step shrinks as the
    velocity grows while snapshots stay on the nominal cadence.

    A CFL violation or the blow-up guard (max speed above blowup_factor
    times max(initial max speed, 1)) halts the run; the result then holds
    the trajectory up to the last good snapshot with halted set.
    """
    slab = build_slab(cfg)
    state = initial_state(cfg, slab)
    forcing = build_forcing(cfg.forcing, slab, cfg.forcing_amplitude, cfg.forcing_frequency)
    settings = settings or DiagnosticSettings.from_run_config(cfg)

    dt = choose_dt(cfg, state)
    steps = cfg.step_count(dt)
    params = StepParams(dt=dt, eps_diss=cfg.eps_diss, cfl=cfg.cfl, dealias=cfg.dealias,
                        dt_cap=cfg.dt_cap, mollifier_eps=cfg.mollifier_eps)
    result = RunResult(cfg, dt, params, forcing)

    logger.info("=" * 70)
    logger.info(f"RUN n={cfg.n} nz={cfg.nz} h={slab.h:.4g} T={cfg.t_final:g}")
    logger.info("=" * 70)
    logger.info(f"initial={cfg.initial} seed={cfg.seed} forcing={cfg.forcing} eps_diss={cfg.eps_diss:g}")
    logger.info(f"dt={dt:.6g} ({'explicit' if cfg.dt is not None else 'auto-CFL'}), {steps} steps")

    stepper = get_stepper(slab)
    reference = max(stepper.max_speed(state.theta.coeffs, state.omega.coeffs), 1.0)
    speed_limit = cfg.blowup_factor * reference

    if store is not None:
        store.write_config(cfg)
    _record(result, 0, state, store, settings, forcing, diagnostics=True)

    adaptive = cfg.dt is None
    for step in range(1, steps + 1):
        try:
            if adaptive:
                target = cfg.t_final if step == steps else step * dt
                state, substeps = advance_to(state, target, params, forcing)
                if substeps > 1:
                    logger.debug(f"step {step}: {substeps} substeps to reach t={target:.6g}")
            else:
                state = step_rk4(state, params, forcing)
        except CFLViolation as e:
            _halt(result, f"CFL violation at step {step}: {e}")
            break
        except SpectralError as e:
            _halt(result, f"non-finite state at step {step}: {e}")
            break
        speed = stepper.max_speed(state.theta.coeffs, state.omega.coeffs)
        if not np.isfinite(speed) or speed > speed_limit:
            _halt(result, f"blow-up guard at step {step}: max speed {speed:.3e} > {speed_limit:.3e}")
            break
        if step % cfg.snapshot_every == 0:
            _record(result, step, state, store, settings, forcing,
                    diagnostics=step % cfg.diagnostics_every == 0)

    if not result.halted:
        logger.info(f"✅ Run complete: {len(result.trajectory)} snapshots, "
                    f"{len(result.diagnostics)} diagnostics records")
    return result


def _record(result: RunResult, step: int, state: SimState, store: Optional[SnapshotStore],
            settings: DiagnosticSettings, forcing: ForcingSpec, diagnostics: bool):
    result.trajectory.append(state)
    if store is not None:
        store.write(step, state)
    if diagnostics:
        result.diagnostics.append(compute_record(state, settings, forcing))


def _halt(result: RunResult, reason: str):
    result.halted = True
    result.reason = reason
    logger.warning(f"❌ Run halted: {reason}")
