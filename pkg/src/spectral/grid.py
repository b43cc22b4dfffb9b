"""Periodic grid, field containers and real/spectral transforms."""
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np
import scipy.fft as sfft

from src.config import Config
from src.exceptions import GridError, SpectralError

Symbol = Union[np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def to_coeffs(values: np.ndarray) -> np.ndarray:
    """FFT over the last two axes; a constant c maps to coefficient c at k = 0."""
    return sfft.fft2(values, axes=(-2, -1), norm='forward', workers=Config.FFT_WORKERS)


def to_values(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of to_coeffs, real part only (no symmetry check)."""
    return sfft.ifft2(coeffs, axes=(-2, -1), norm='forward', workers=Config.FFT_WORKERS).real


def grid_sum(values: np.ndarray) -> float:
    """Sum used by every quadrature; exactly rounded in fixed-order mode."""
    if Config.FIXED_ORDER:
        return math.fsum(np.ravel(values).tolist())
    return float(np.sum(values))


@dataclass(frozen=True)
class TorusGrid:
    """Square periodic grid of n x n nodes with period l."""
    n: int
    l: float = 2 * math.pi

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise GridError(f"n must be even and >= 8, got {self.n}")
        if self.n & (self.n - 1):
            raise GridError(f"n must be a power of two, got {self.n}")
        if not self.l > 0:
            raise GridError(f"period l must be positive, got {self.l}")

    @property
    def dx(self) -> float:
        return self.l / self.n

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def area(self) -> float:
        return self.l * self.l

    @cached_property
    def mode_numbers(self):
        """Integer mode numbers (m1, m2), k = 2*pi*m/l."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        m1, m2 = np.meshgrid(m, m, indexing='ij')
        return _frozen(m1, float), _frozen(m2, float)

    @cached_property
    def k1(self) -> np.ndarray:
        return _frozen(self.mode_numbers[0] * (2 * math.pi / self.l), float)

    @cached_property
    def k2(self) -> np.ndarray:
        return _frozen(self.mode_numbers[1] * (2 * math.pi / self.l), float)

    @cached_property
    def kmag(self) -> np.ndarray:
        return _frozen(np.sqrt(self.k1 ** 2 + self.k2 ** 2), float)

    @cached_property
    def inv_kmag(self) -> np.ndarray:
        """1/|k| with the k = 0 entry set to 0."""
        out = np.zeros(self.shape)
        np.divide(1.0, self.kmag, out=out, where=self.kmag > 0)
        return _frozen(out, float)

    @cached_property
    def nyquist_lines(self) -> np.ndarray:
        m1, m2 = self.mode_numbers
        half = self.n // 2
        return _frozen((m1 == -half) | (m2 == -half), bool)

    @cached_property
    def ik1(self) -> np.ndarray:
        """Symbol of d/dx1; zero on the Nyquist lines so real fields stay real."""
        return _frozen(np.where(self.nyquist_lines, 0.0, 1j * self.k1), complex)

    @cached_property
    def ik2(self) -> np.ndarray:
        return _frozen(np.where(self.nyquist_lines, 0.0, 1j * self.k2), complex)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True where a coefficient survives the 2/3 rule."""
        m1, m2 = self.mode_numbers
        return _frozen(np.maximum(np.abs(m1), np.abs(m2)) <= self.n / 3, bool)

    @cached_property
    def coordinates(self):
        x = np.arange(self.n) * self.dx
        x1, x2 = np.meshgrid(x, x, indexing='ij')
        return _frozen(x1, float), _frozen(x2, float)

    @property
    def center(self):
        return (self.l / 2, self.l / 2)

    def reflect(self, array: np.ndarray) -> np.ndarray:
        """Re-index the last two axes by k -> -k."""
        return np.roll(np.flip(array, axis=(-2, -1)), 1, axis=(-2, -1))


def hermitian_defect(coeffs: np.ndarray, grid: TorusGrid) -> float:
    """max |c(k) - conj(c(-k))| relative to max |c|."""
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(coeffs - np.conj(grid.reflect(coeffs))))) / scale


@dataclass(frozen=True, eq=False)
class PhysField2D:
    """Real field sampled on the grid nodes."""
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != self.grid.shape:
            raise GridError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if np.iscomplexobj(values):
            raise SpectralError("physical field values must be real")
        if not np.all(np.isfinite(values)):
            raise SpectralError("physical field contains non-finite values")
        object.__setattr__(self, 'values', _frozen(values, float))

    @classmethod
    def zeros(cls, grid: TorusGrid) -> 'PhysField2D':
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: TorusGrid, fn) -> 'PhysField2D':
        x1, x2 = grid.coordinates
        return cls(grid, np.broadcast_to(fn(x1, x2), grid.shape))

    @property
    def mean(self) -> float:
        return grid_sum(self.values) / self.values.size

    def integral(self) -> float:
        return grid_sum(self.values) * self.grid.dx ** 2

    def lp_norm(self, p: float) -> float:
        return lp_norm(self, p)

    def to_spectral(self) -> 'SpectralField2D':
        return forward_transform(self)

    def __add__(self, other: 'PhysField2D') -> 'PhysField2D':
        return PhysField2D(self.grid, self.values + other.values)

    def __sub__(self, other: 'PhysField2D') -> 'PhysField2D':
        return PhysField2D(self.grid, self.values - other.values)

    def __mul__(self, other) -> 'PhysField2D':
        if isinstance(other, PhysField2D):
            return PhysField2D(self.grid, self.values * other.values)
        return PhysField2D(self.grid, self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> 'PhysField2D':
        return PhysField2D(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class SpectralField2D:
    """Fourier coefficients of a real field; coeff(-k) = conj(coeff(k))."""
    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs)
        if coeffs.shape != self.grid.shape:
            raise GridError(f"coefficient shape {coeffs.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise SpectralError("spectral field contains non-finite coefficients")
        object.__setattr__(self, 'coeffs', _frozen(coeffs, complex))

    @classmethod
    def zeros(cls, grid: TorusGrid) -> 'SpectralField2D':
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    @classmethod
    def from_function(cls, grid: TorusGrid, fn) -> 'SpectralField2D':
        return forward_transform(PhysField2D.from_function(grid, fn))

    @property
    def mean(self) -> float:
        return float(self.coeffs[0, 0].real)

    def has_zero_mean(self, tol: float = None) -> bool:
        tol = Config.MEAN_TOL if tol is None else tol
        scale = max(float(np.max(np.abs(self.coeffs))), 1.0)
        return abs(self.coeffs[0, 0]) <= tol * scale

    def without_mean(self) -> 'SpectralField2D':
        coeffs = np.array(self.coeffs)
        coeffs[0, 0] = 0.0
        return SpectralField2D(self.grid, coeffs)

    def with_coeffs(self, coeffs: np.ndarray) -> 'SpectralField2D':
        return SpectralField2D(self.grid, coeffs)

    def to_physical(self) -> PhysField2D:
        return inverse_transform(self)

    def l2_norm(self) -> float:
        return math.sqrt(self.grid.area * grid_sum(np.abs(self.coeffs) ** 2))

    def __add__(self, other: 'SpectralField2D') -> 'SpectralField2D':
        return SpectralField2D(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: 'SpectralField2D') -> 'SpectralField2D':
        return SpectralField2D(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> 'SpectralField2D':
        return SpectralField2D(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> 'SpectralField2D':
        return SpectralField2D(self.grid, -self.coeffs)


def forward_transform(f: PhysField2D) -> SpectralField2D:
    """
    Transform grid values to Fourier coefficients.

    Args:
        f: Physical field (finite values are enforced by PhysField2D)

    Returns:
        SpectralField2D with coeff(0) equal to the mean of f
    """
    values = np.asarray(f.values)
    if not np.all(np.isfinite(values)):
        raise SpectralError("forward_transform received non-finite values")
    return SpectralField2D(f.grid, to_coeffs(values))


def inverse_transform(F: SpectralField2D) -> PhysField2D:
    """
    Transform Fourier coefficients back to grid values.

    Raises:
        SpectralError: if the coefficients are not Hermitian-symmetric
    """
    defect = hermitian_defect(F.coeffs, F.grid)
    if defect > Config.HERMITIAN_TOL:
        raise SpectralError(
            f"coefficients break Hermitian symmetry (relative defect {defect:.3e})"
        )
    return PhysField2D(F.grid, to_values(F.coeffs))


def sample_symbol(m: Symbol, grid: TorusGrid) -> np.ndarray:
    if callable(m):
        with np.errstate(divide='ignore', invalid='ignore'):
            symbol = m(grid.k1, grid.k2)
    else:
        symbol = m
    return np.array(np.broadcast_to(symbol, grid.shape), dtype=complex)


def apply_multiplier(F: SpectralField2D, m: Symbol, homogeneous: bool = False,
                     real: bool = True) -> SpectralField2D:
    """
    Multiply every coefficient by a symbol, coeff(k) -> m(k) coeff(k).

    Args:
        F: Input field
        m: Symbol as a callable of (k1, k2) arrays or a sampled array
        homogeneous: Treat m(0) as 0 (singular or homogeneous symbols)
        real: Require m(-k) = conj(m(k)); Nyquist-line modes where the
            sampled symbol cannot satisfy this are zeroed

    Returns:
        New SpectralField2D

    Raises:
        SpectralError: singular symbol at k != 0, or symmetry violated off
            the Nyquist lines
    """
    grid = F.grid
    symbol = sample_symbol(m, grid)
    if homogeneous:
        symbol[0, 0] = 0.0
    if not np.all(np.isfinite(symbol)):
        bad = np.argwhere(~np.isfinite(symbol))[0]
        raise SpectralError(f"symbol is singular at mode index {tuple(int(i) for i in bad)}")
    if real:
        mirrored = np.conj(grid.reflect(symbol))
        mismatch = ~np.isclose(symbol, mirrored, rtol=1e-12, atol=1e-300)
        if np.any(mismatch & ~grid.nyquist_lines):
            raise SpectralError("symbol violates m(-k) = conj(m(k)); output would not be real")
        symbol[mismatch] = 0.0
    return F.with_coeffs(F.coeffs * symbol)


def dealias(F: SpectralField2D) -> SpectralField2D:
    """Zero every coefficient with max(|m1|, |m2|) > n/3."""
    return F.with_coeffs(np.where(F.grid.dealias_mask, F.coeffs, 0.0))


def zero_pad(F: SpectralField2D, n: int) -> SpectralField2D:
    """F on an n x n grid of the same period; modes copied by mode number, Nyquist lines dropped."""
    grid = F.grid
    if n < grid.n:
        raise GridError(f"zero_pad target n={n} is coarser than the source n={grid.n}")
    fine = TorusGrid(n, grid.l)
    m1, m2 = (m.astype(int) % n for m in grid.mode_numbers)
    coeffs = np.zeros(fine.shape, dtype=complex)
    coeffs[m1, m2] = np.where(grid.nyquist_lines, 0.0, F.coeffs)
    return SpectralField2D(fine, coeffs)


def lp_norm(f: PhysField2D, p: float) -> float:
    """L^p norm on the torus by grid quadrature; p = inf gives the max norm."""
    values = np.abs(f.values)
    if math.isinf(p):
        return float(values.max())
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return (grid_sum(values ** p) * f.grid.dx ** 2) ** (1.0 / p)


def homogeneous_sobolev_norm(theta: SpectralField2D, s: float) -> float:
    """(l^2 sum_{k != 0} |k|^{2s} |theta(k)|^2)^{1/2}."""
    grid = theta.grid
    weights = np.zeros(grid.shape)
    nonzero = grid.kmag > 0
    weights[nonzero] = grid.kmag[nonzero] ** (2 * s)
    return math.sqrt(grid.area * grid_sum(weights * np.abs(theta.coeffs) ** 2))


def spectral_gradient(f: PhysField2D):
    """Horizontal gradient (d/dx1, d/dx2) of a field, computed spectrally."""
    coeffs = to_coeffs(f.values)
    grid = f.grid
    return (PhysField2D(grid, to_values(grid.ik1 * coeffs)),
            PhysField2D(grid, to_values(grid.ik2 * coeffs)))


def random_band_limited(grid: TorusGrid, kmax: int, rng: np.random.Generator,
                        amplitude: float = 1.0) -> SpectralField2D:
    """Random real zero-mean field on 1 <= max(|m1|, |m2|) <= kmax with rms = amplitude."""
    m1, m2 = grid.mode_numbers
    band = (np.maximum(np.abs(m1), np.abs(m2)) <= kmax) & ((m1 != 0) | (m2 != 0))
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    coeffs = np.where(band, noise, 0.0)
    coeffs = 0.5 * (coeffs + np.conj(grid.reflect(coeffs)))
    field = SpectralField2D(grid, coeffs)
    rms = field.l2_norm() / grid.l
    return field * (amplitude / rms) if rms > 0 else field
