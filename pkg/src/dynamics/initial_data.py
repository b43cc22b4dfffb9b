"""Named initial-data generators."""
import math

import numpy as np

from src.config import RunConfig
from src.dynamics.state import SimState
from src.elliptic.slab import LayeredField3D, SlabGrid
from src.exceptions import SnapshotFormatError
from src.spectral.data_prep import prepare_data
from src.spectral.grid import SpectralField2D, random_band_limited
from src.storage.snapshot_store import read_snapshot
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


def zero_data(slab: SlabGrid, cfg: RunConfig):
    return SpectralField2D.zeros(slab.torus), LayeredField3D.zeros(slab)


def single_mode_data(slab: SlabGrid, cfg: RunConfig):
    """theta = a cos(2 pi kmax x1 / l), omega = 0."""
    wave = 2 * math.pi * cfg.kmax / slab.torus.l
    theta = SpectralField2D.from_function(slab.torus, lambda x1, x2: cfg.amplitude * np.cos(wave * x1))
    return theta, LayeredField3D.zeros(slab)


def sqg_smooth_data(slab: SlabGrid, cfg: RunConfig):
    """Random band-limited theta with rms = amplitude, omega = 0."""
    rng = np.random.default_rng(cfg.seed)
    return random_band_limited(slab.torus, cfg.kmax, rng, cfg.amplitude), LayeredField3D.zeros(slab)


def qg_smooth_data(slab: SlabGrid, cfg: RunConfig):
    """
    sqg_smooth theta plus interior vorticity: a band-limited horizontal
    pattern times a Gaussian in z centred at h/4 with width h/8.
    """
    theta, _ = sqg_smooth_data(slab, cfg)
    rng = np.random.default_rng([cfg.seed, 1])
    pattern = random_band_limited(slab.torus, cfg.kmax, rng, cfg.amplitude).to_physical().values
    z = slab.levels
    profile = np.exp(-0.5 * ((z - slab.h / 4) / (slab.h / 8)) ** 2)
    return theta, LayeredField3D(slab, profile[:, None, None] * pattern[None])


def snapshot_data(slab: SlabGrid, cfg: RunConfig):
    state = read_snapshot(cfg.snapshot)
    if state.slab != slab:
        raise SnapshotFormatError(
            f"snapshot {cfg.snapshot} has grid n={state.slab.torus.n}, nz={state.slab.nz}; "
            f"config asks for n={slab.torus.n}, nz={slab.nz}"
        )
    return state.theta, state.omega


INITIAL_BUILDERS = {
    'zero': zero_data,
    'single_mode': single_mode_data,
    'sqg_smooth': sqg_smooth_data,
    'qg_smooth': qg_smooth_data,
    'snapshot': snapshot_data,
}


def initial_state(cfg: RunConfig, slab: SlabGrid) -> SimState:
    """
    Build the t = 0 state named by cfg.initial.

    Applies prepare_data when cfg.prepare_eps > 0 and removes any mean
    left in theta.
    """
    try:
        builder = INITIAL_BUILDERS[cfg.initial]
    except KeyError:
        raise ValueError(f"unknown initial generator {cfg.initial!r}") from None
    theta, omega = builder(slab, cfg)

    if cfg.prepare_eps > 0:
        prepared = prepare_data(omega, theta, cfg.prepare_eps)
        theta, omega = prepared.theta, prepared.omega

    if not theta.has_zero_mean():
        logger.info(f"Removing theta mean {theta.mean:.3e} from initial data")
        theta = theta.without_mean()
    return SimState(0.0, theta, omega)
