"""Exact and asymptotic transport statistics of ballistic chaotic cavities:
cumulants of the conductance, shot noise and Wigner delay time for the
symmetry classes beta in {1, 2, 4}, with independent verification oracles."""

__version__ = "0.1.0"

from .params import DelayParams, TransportParams  # noqa: F401
from .rational import BACKEND, rat  # noqa: F401
