"""Exception types raised across the solver."""


class SpectralError(ValueError):
    """Invalid spectral input: non-finite data, broken symmetry, singular symbol."""


class OperatorError(ValueError):
    """Invalid operator parameters."""


class ExponentError(ValueError):
    """Lebesgue exponent outside the supported range."""


class WeakFormError(ValueError):
    """Trajectory unusable for a weak-formulation residual."""


class SnapshotFormatError(ValueError):
    """Snapshot file does not match the QGHS layout."""


class ConfigError(ValueError):
    """Configuration text rejected; carries the offending line number."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        if line:
            message = f"line {line}: {message}"
        super().__init__(message)


class CFLViolation(RuntimeError):
    """Requested time step exceeds the CFL bound."""

    def __init__(self, dt: float, recommended_dt: float):
        self.dt = dt
        self.recommended_dt = recommended_dt
        super().__init__(
            f"dt={dt:.6g} exceeds CFL bound; recommended dt <= {recommended_dt:.6g}"
        )


class GridError(ValueError):
    """Grid dimensions violate their invariants."""
