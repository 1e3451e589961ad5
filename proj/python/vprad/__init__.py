"""Kinetic simulator for the radial Vlasov-Poisson system around a repulsive
point charge: exact action-angle integration of the Kepler flow, nonlinear
evolution of the conjugated density, field decay and modified-scattering
diagnostics."""

from vprad._core import *  # noqa: F401,F403
from vprad._core import __version__  # noqa: F401
