"""Data-driven parameter tuning for algorithms whose utility is piecewise in the parameter.

Submodules: ``piecewise`` (exact 1-d piecewise functions), ``dispersion``,
``online`` (EWF, Exp3, regret), ``private`` (exponential mechanism),
``greedy``, ``iqp`` and ``market`` (problem families), ``rademacher`` and
``harness``.
"""
from ._backend import BACKEND
from .errors import DispersedError

__version__ = "0.1.0"

__all__ = ["BACKEND", "DispersedError", "__version__"]
