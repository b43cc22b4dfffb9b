"""Configuration management for the half-space QG solver."""
import math
import os
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Dict, Optional, Tuple

from dotenv import load_dotenv

from src.exceptions import ConfigError

# Load environment variables from .env file
load_dotenv()


class Config:
    """Process-wide numerical settings (environment overridable)."""

    # FFT threading and deterministic summation
    FFT_WORKERS = int(os.getenv('QG_FFT_WORKERS', '1'))
    FIXED_ORDER = os.getenv('QG_FIXED_ORDER', 'false').lower() == 'true'

    # Time stepping
    CFL = float(os.getenv('QG_CFL', '0.4'))
    DT_CAP = float(os.getenv('QG_DT_CAP', '0.05'))
    # Auto-CFL runs step at this fraction of the current CFL bound
    CFL_SAFETY = float(os.getenv('QG_CFL_SAFETY', '0.8'))
    VELOCITY_FLOOR = 1e-12
    BLOWUP_FACTOR = float(os.getenv('QG_BLOWUP_FACTOR', '1000'))

    # Tolerances
    HERMITIAN_TOL = float(os.getenv('QG_HERMITIAN_TOL', '1e-10'))
    MEAN_TOL = float(os.getenv('QG_MEAN_TOL', '1e-12'))

    # Weak-form quadrature
    TIME_QUADRATURE = os.getenv('QG_TIME_QUADRATURE', 'simpson').lower()
    VERTICAL_NODES = int(os.getenv('QG_VERTICAL_NODES', '48'))

    # Calibrated constants are this multiple of the largest observed ratio
    CALIBRATION_FACTOR = 2.0

    # Output
    OUTPUT_DIR = os.getenv('QG_OUTPUT_DIR', 'runs')
    SNAPSHOT_VERSION = 1

    @classmethod
    def validate(cls):
        """Validate the numerical settings."""
        if cls.FFT_WORKERS < 1:
            raise ValueError("QG_FFT_WORKERS must be >= 1")
        if not 0 < cls.CFL <= 2.0:
            raise ValueError(f"QG_CFL must be in (0, 2], got {cls.CFL}")
        if not 0 < cls.CFL_SAFETY <= 1.0:
            raise ValueError(f"QG_CFL_SAFETY must be in (0, 1], got {cls.CFL_SAFETY}")
        if cls.DT_CAP <= 0:
            raise ValueError("QG_DT_CAP must be positive")
        if cls.BLOWUP_FACTOR <= 1:
            raise ValueError("QG_BLOWUP_FACTOR must exceed 1")
        if cls.TIME_QUADRATURE not in ('simpson', 'trapezoid'):
            raise ValueError(
                f"QG_TIME_QUADRATURE must be 'simpson' or 'trapezoid', got {cls.TIME_QUADRATURE!r}"
            )
        if cls.VERTICAL_NODES < 4:
            raise ValueError("QG_VERTICAL_NODES must be >= 4")


INITIAL_GENERATORS = ('zero', 'single_mode', 'sqg_smooth', 'qg_smooth', 'snapshot')
FORCING_GENERATORS = ('none', 'surface_mode', 'interior_mode')

# Admissible exponent windows (open intervals)
P_RANGE = (Fraction(4, 3), math.inf)
Q_RANGE = (Fraction(6, 5), Fraction(3))

REQUIRED_KEYS = ('n', 'nz', 't_final')


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""
    n: int
    nz: int
    t_final: float
    l: float = 2 * math.pi
    h: Optional[float] = None
    initial: str = 'sqg_smooth'
    seed: int = 0
    amplitude: float = 1.0
    kmax: int = 4
    snapshot: Optional[str] = None
    prepare_eps: float = 0.0
    forcing: str = 'none'
    forcing_amplitude: float = 0.0
    forcing_frequency: float = 1.0
    dt: Optional[float] = None
    eps_diss: float = 0.0
    snapshot_every: int = 1
    diagnostics_every: int = 1
    cfl: float = field(default_factory=lambda: Config.CFL)
    dt_cap: float = field(default_factory=lambda: Config.DT_CAP)
    dealias: bool = True
    blowup_factor: float = field(default_factory=lambda: Config.BLOWUP_FACTOR)
    p_ladder: Tuple[float, ...] = (2.0, 3.0, 4.0)
    q_ladder: Tuple[float, ...] = (2.0,)
    alphas: Tuple[float, ...] = (0.4, 0.6, 0.8)
    mollifier_eps: Optional[float] = None
    output_dir: str = field(default_factory=lambda: Config.OUTPUT_DIR)

    @property
    def slab_height(self) -> float:
        return self.h if self.h is not None else self.l / 2

    def step_count(self, dt: float) -> int:
        """Number of steps of size dt covering [0, t_final]."""
        if self.t_final == 0:
            return 0
        return int(round(self.t_final / dt))

    def to_text(self) -> str:
        """Render back to key = value text (parse_config round trip)."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name == 'dt':
                lines.append(f"dt = {value!r}")
            elif isinstance(value, tuple):
                lines.append(f"{f.name} = {', '.join(repr(float(v)) for v in value)}")
            elif isinstance(value, bool):
                lines.append(f"{f.name} = {'true' if value else 'false'}")
            elif isinstance(value, float):
                lines.append(f"{f.name} = {value!r}")
            else:
                lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def with_overrides(self, **changes) -> 'RunConfig':
        return replace(self, **changes)


def _to_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ('true', 'yes', 'on', '1'):
        return True
    if lowered in ('false', 'no', 'off', '0'):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _to_float_list(text: str) -> Tuple[float, ...]:
    items = [item.strip() for item in text.split(',') if item.strip()]
    if not items:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(float(Fraction(item)) for item in items)


def _to_dt(text: str) -> Optional[float]:
    if text.lower() == 'auto':
        return None
    return float(text)


def _to_optional_str(text: str) -> Optional[str]:
    return text or None


_PARSERS = {
    'n': int,
    'nz': int,
    't_final': float,
    'l': float,
    'h': float,
    'initial': str,
    'seed': int,
    'amplitude': float,
    'kmax': int,
    'snapshot': _to_optional_str,
    'prepare_eps': float,
    'forcing': str,
    'forcing_amplitude': float,
    'forcing_frequency': float,
    'dt': _to_dt,
    'eps_diss': float,
    'snapshot_every': int,
    'diagnostics_every': int,
    'cfl': float,
    'dt_cap': float,
    'dealias': _to_bool,
    'blowup_factor': float,
    'p_ladder': _to_float_list,
    'q_ladder': _to_float_list,
    'alphas': _to_float_list,
    'mollifier_eps': float,
    'output_dir': str,
}


def _check_exponents(values, bounds, label, line):
    lo, hi = bounds
    for v in values:
        if not (lo < v < hi):
            hi_text = '∞' if hi == math.inf else str(hi)
            raise ConfigError(
                f"{label} = {v:g} outside the admissible range ({lo}, {hi_text})", line
            )


def parse_config(text: str) -> RunConfig:
    """
    Parse key = value configuration text.

    Args:
        text: UTF-8 configuration text; '#' starts a comment

    Returns:
        Validated RunConfig with defaults filled from Config

    Raises:
        ConfigError: first problem found, with its line number when it has one
    """
    values: Dict[str, object] = {}
    key_lines: Dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"malformed line {raw.strip()!r} (expected key = value)", lineno)
        key, value = (part.strip() for part in line.split('=', 1))
        if not key:
            raise ConfigError("missing key before '='", lineno)
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {key_lines[key]})", lineno)
        try:
            values[key] = _PARSERS[key](value)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"invalid value for {key!r}: {e}", lineno) from e
        key_lines[key] = lineno

    for key in REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")

    line_of = key_lines.get
    n = values['n']
    if n < 8 or n % 2 or n & (n - 1):
        raise ConfigError(f"n = {n} must be a power of two >= 8", line_of('n', 0))
    if values['nz'] < 16:
        raise ConfigError(f"nz = {values['nz']} must be >= 16", line_of('nz', 0))
    if values['t_final'] < 0:
        raise ConfigError("t_final must be >= 0", line_of('t_final', 0))
    if values.get('l', 1.0) <= 0:
        raise ConfigError("l must be positive", line_of('l'))
    l = values.get('l', 2 * math.pi)
    if 'h' in values and values['h'] < l / 2:
        raise ConfigError(f"h = {values['h']:g} must be >= l/2 = {l / 2:g}", line_of('h'))

    if 'p_ladder' in values:
        _check_exponents(values['p_ladder'], P_RANGE, 'p', line_of('p_ladder'))
    if 'q_ladder' in values:
        _check_exponents(values['q_ladder'], Q_RANGE, 'q', line_of('q_ladder'))
    for alpha in values.get('alphas', ()):
        if not 0 < alpha < 1:
            raise ConfigError(f"alpha = {alpha:g} must lie in (0, 1)", line_of('alphas'))

    if 'snapshot' in values and values['snapshot']:
        values.setdefault('initial', 'snapshot')
    initial = values.get('initial', 'sqg_smooth')
    if initial not in INITIAL_GENERATORS:
        raise ConfigError(
            f"unknown initial generator {initial!r}; choose from {', '.join(INITIAL_GENERATORS)}",
            line_of('initial', 0)
        )
    if initial == 'snapshot' and not values.get('snapshot'):
        raise ConfigError("initial = snapshot requires a snapshot path", line_of('initial', 0))
    if values.get('forcing', 'none') not in FORCING_GENERATORS:
        raise ConfigError(
            f"unknown forcing generator {values['forcing']!r}; choose from {', '.join(FORCING_GENERATORS)}",
            line_of('forcing', 0)
        )

    for key in ('snapshot_every', 'diagnostics_every', 'kmax'):
        if key in values and values[key] < 1:
            raise ConfigError(f"{key} must be >= 1", line_of(key))
    for key in ('eps_diss', 'prepare_eps', 'forcing_amplitude'):
        if key in values and values[key] < 0:
            raise ConfigError(f"{key} must be >= 0", line_of(key))
    for key in ('cfl', 'dt_cap', 'mollifier_eps'):
        if key in values and values[key] <= 0:
            raise ConfigError(f"{key} must be positive", line_of(key))
    if values.get('blowup_factor', 2.0) <= 1:
        raise ConfigError("blowup_factor must exceed 1", line_of('blowup_factor'))

    snapshot_every = values.get('snapshot_every', 1)
    if values.get('diagnostics_every', 1) % snapshot_every:
        raise ConfigError(
            "diagnostics_every must be a multiple of snapshot_every",
            line_of('diagnostics_every', 0)
        )

    dt = values.get('dt')
    if dt is not None:
        if dt <= 0:
            raise ConfigError("dt must be positive or 'auto'", line_of('dt'))
        t_final = values['t_final']
        steps = int(round(t_final / dt))
        if abs(steps * dt - t_final) > 1e-9 * max(1.0, t_final):
            raise ConfigError(
                f"t_final = {t_final:g} is not an integer number of steps dt = {dt:g}", line_of('dt')
            )
        if steps % snapshot_every:
            raise ConfigError(
                f"snapshot_every = {snapshot_every} does not divide the step count {steps}",
                line_of('snapshot_every', line_of('dt'))
            )

    return RunConfig(**values)
