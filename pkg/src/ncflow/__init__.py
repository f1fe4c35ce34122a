"""Truncated signature algebra, free Lie tools, random-matrix and Wiener
Monte Carlo, and moment functionals, with a compiled kernel for the hot
batch-signature loop (pure-Python fallback selected at import when the
extension is unavailable or NCFLOW_DISABLE_SPEEDUPS is set)."""

from . import freelie, matfun, ncmeasure, ncseries, pathsig, rmt, wiener
from ._core import BACKEND, HAVE_SPEEDUPS
from ._util import ConfigError, GuardError, NumericalCheckError

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BACKEND",
    "HAVE_SPEEDUPS",
    "ConfigError",
    "GuardError",
    "NumericalCheckError",
    "freelie",
    "matfun",
    "ncmeasure",
    "ncseries",
    "pathsig",
    "rmt",
    "wiener",
]
