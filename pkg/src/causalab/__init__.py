"""Desk-scale numerics for confinement by boundary conditions, instantaneous
spreading of free wave packets, and the comparison of relativistic and
nonrelativistic free-field correlators."""

__version__ = "0.1.0"

from . import boundary, fock, lieb_liniger, numerics, relcompare, spreading  # noqa: F401
from .errors import CausalabError  # noqa: F401
