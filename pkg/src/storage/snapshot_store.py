"""
Snapshot persistence in the QGHS binary layout.

Layout (little-endian throughout):
    magic   4s   b"QGHS"
    version u32
    n       u32
    nz      u32
    l       f64
    h       f64
    t       f64
    theta   f64[n, n, 2]   Fourier coefficients, (real, imag) pairs, row-major
    omega   f64[nz, n, n]  grid values per level, row-major
"""
import struct
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from src.config import Config, RunConfig, parse_config
from src.dynamics.state import SimState
from src.elliptic.slab import LayeredField3D, SlabGrid
from src.exceptions import GridError, SnapshotFormatError
from src.spectral.grid import SpectralField2D, TorusGrid
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

MAGIC = b"QGHS"
HEADER = struct.Struct('<4sIIIddd')
F64 = np.dtype("<f8")
C128 = np.dtype("<c16")  # (real, imag) f64 pairs

PathLike = Union[str, Path]


def encode_snapshot(s: SimState) -> bytes:
    slab = s.slab
    header = HEADER.pack(MAGIC, Config.SNAPSHOT_VERSION, slab.torus.n, slab.nz,
                         slab.torus.l, slab.h, s.t)
    return header + s.theta.coeffs.astype(C128).tobytes(order='C') + s.omega.values.astype(F64).tobytes(order='C')


def decode_snapshot(data: bytes) -> SimState:
    """
    Rebuild a SimState from QGHS bytes.

    Raises:
        SnapshotFormatError: magic, version, dimension or size mismatch
    """
    if len(data) < HEADER.size:
        raise SnapshotFormatError(f"truncated snapshot: {len(data)} bytes, header needs {HEADER.size}")
    magic, version, n, nz, l, h, t = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != Config.SNAPSHOT_VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    try:
        slab = SlabGrid(TorusGrid(n, l), nz, h)
    except GridError as e:
        raise SnapshotFormatError(f"invalid snapshot dimensions: {e}") from e

    theta_size = n * n * 2 * F64.itemsize
    omega_size = nz * n * n * F64.itemsize
    expected = HEADER.size + theta_size + omega_size
    if len(data) != expected:
        raise SnapshotFormatError(
            f"snapshot size {len(data)} bytes does not match n={n}, nz={nz} (expected {expected})"
        )
    coeffs = np.frombuffer(data, dtype=C128, count=n * n, offset=HEADER.size).reshape(n, n)
    omega = np.frombuffer(data, dtype=F64, count=nz * n * n, offset=HEADER.size + theta_size)
    theta = SpectralField2D(slab.torus, coeffs)
    return SimState(t, theta, LayeredField3D(slab, omega.reshape(nz, n, n)))


def write_snapshot(s: SimState, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_snapshot(s))
    return path


def read_snapshot(path: PathLike) -> SimState:
    return decode_snapshot(Path(path).read_bytes())


class SnapshotStore:
    """Snapshots of one run inside an output directory."""

    CONFIG_NAME = 'run_config.txt'

    def __init__(self, output_dir: Optional[PathLike] = None):
        self.output_dir = Path(output_dir or Config.OUTPUT_DIR)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, step: int) -> Path:
        return self.output_dir / f"snap_{step:06d}.qghs"

    def write(self, step: int, state: SimState) -> Path:
        path = write_snapshot(state, self.path_for(step))
        logger.debug(f"Wrote snapshot {path.name} (t={state.t:.6g})")
        return path

    def load(self, step: int) -> SimState:
        return read_snapshot(self.path_for(step))

    def list_steps(self) -> List[int]:
        steps = []
        for path in self.output_dir.glob('snap_*.qghs'):
            try:
                steps.append(int(path.stem.split('_', 1)[1]))
            except ValueError:
                logger.warning(f"Ignoring unrecognised snapshot name {path.name}")
        return sorted(steps)

    def load_all(self) -> List[Tuple[int, SimState]]:
        return [(step, self.load(step)) for step in self.list_steps()]

    def write_config(self, cfg: RunConfig) -> Path:
        path = self.output_dir / self.CONFIG_NAME
        path.write_text(cfg.to_text(), encoding='utf-8')
        return path

    def read_config(self) -> RunConfig:
        return parse_config((self.output_dir / self.CONFIG_NAME).read_text(encoding='utf-8'))
