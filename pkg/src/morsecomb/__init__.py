"""Combination of Morse (Anosov) subgroups in SL(d, R): geometry kernels and a certifier."""

__version__ = "0.1.0"

from .errors import ConfigError, GeometryError  # noqa: E402
from .tolerances import DEFAULT_TOL, Tolerances  # noqa: E402
from .weyl import FacePattern, ThetaSpec  # noqa: E402

__all__ = ["ConfigError", "DEFAULT_TOL", "FacePattern", "GeometryError", "ThetaSpec", "Tolerances", "__version__"]
