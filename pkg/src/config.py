import os
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv
project_root = Path(__file__).parent.parent
load_dotenv(project_root / '.env')


class ConfigurationError(Exception):
    """Exception raised for configuration errors."""
    pass


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == '':
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be a real number, got {raw!r}")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == '':
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}")


class Config:
    """Tolerances and defaults for the helicoidal surface toolkit.

    Loads configuration from environment variables with validation.
    Every value can be overridden with a ``HELISMS_`` prefixed variable.
    """

    # Geometric thresholds
    EPS_REG: float = _env_float('HELISMS_EPS_REG', 1e-12)
    EPS_HALF: float = _env_float('HELISMS_EPS_HALF', 1e-9)
    UNIT_TOL: float = _env_float('HELISMS_UNIT_TOL', 1e-12)

    # Coefficient vanishing threshold used by the classifier
    TOL_ZERO: float = _env_float('HELISMS_TOL_ZERO', 1e-10)

    # Finite differences
    FD_STEP: float = _env_float('HELISMS_FD_STEP', 1e-5)
    FD_CURVATURE_STEP: float = _env_float('HELISMS_FD_CURVATURE_STEP', 1e-3)

    # Integration
    RK4_STEP: float = _env_float('HELISMS_RK4_STEP', 1e-3)
    TRUNCATION_FLOOR: float = _env_float('HELISMS_TRUNCATION_FLOOR', 1e-6)

    # Coefficient extraction
    COND_LIMIT: float = _env_float('HELISMS_COND_LIMIT', 1e8)

    # Search grid
    SEARCH_GRID: Path = Path(os.getenv('HELISMS_SEARCH_GRID', str(project_root / 'config' / 'search_grid.yml')))
    WORKERS: int = _env_int('HELISMS_WORKERS', 4)

    LOG_LEVEL: str = os.getenv('HELISMS_LOG_LEVEL', 'WARNING')

    _OVERRIDABLE = (
        'EPS_REG', 'EPS_HALF', 'UNIT_TOL', 'TOL_ZERO', 'FD_STEP',
        'FD_CURVATURE_STEP', 'RK4_STEP', 'TRUNCATION_FLOOR', 'COND_LIMIT',
    )

    @classmethod
    def validate(cls) -> None:
        """Validate that every tolerance is usable.

        Raises:
            ConfigurationError: If a value is missing or out of range
        """
        for name in cls._OVERRIDABLE:
            value = getattr(cls, name)
            if not (value > 0):
                raise ConfigurationError(f"{name} must be strictly positive, got {value}")

        if not (cls.FD_STEP < 1e-2 and cls.FD_CURVATURE_STEP < 1e-2):
            raise ConfigurationError("finite-difference steps must lie in (0, 1e-2)")

        if cls.WORKERS < 1:
            raise ConfigurationError("HELISMS_WORKERS must be at least 1")

        if cls.LOG_LEVEL.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ConfigurationError(f"Unknown log level: {cls.LOG_LEVEL}")

    @classmethod
    def apply_overrides(cls, overrides: Optional[Dict[str, Any]]) -> None:
        """Apply tolerance overrides (keys are attribute names, case-insensitive).

        Raises:
            ConfigurationError: For unknown keys or invalid values
        """
        if not overrides:
            return
        previous = cls.snapshot()
        try:
            for key, value in overrides.items():
                name = key.upper()
                if name not in cls._OVERRIDABLE:
                    raise ConfigurationError(f"Unknown tolerance: {key}")
                try:
                    setattr(cls, name, float(value))
                except (TypeError, ValueError):
                    raise ConfigurationError(f"Tolerance {key} must be a real number, got {value!r}")
            cls.validate()
        except ConfigurationError:
            cls.restore(previous)
            raise

    @classmethod
    def snapshot(cls) -> Dict[str, float]:
        """Current overridable values, for restoring after a run."""
        return {name: getattr(cls, name) for name in cls._OVERRIDABLE}

    @classmethod
    def restore(cls, values: Dict[str, float]) -> None:
        for name, value in values.items():
            setattr(cls, name, value)

    @classmethod
    def as_dict(cls) -> Dict[str, Any]:
        """Get every effective tolerance, for report headers.

        Returns:
            Mapping of lower-case names to values
        """
        values: Dict[str, Any] = {name.lower(): getattr(cls, name) for name in cls._OVERRIDABLE}
        values['search_grid'] = str(cls.SEARCH_GRID)
        values['workers'] = cls.WORKERS
        return values


# Validate configuration on import
Config.validate()
