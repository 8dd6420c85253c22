"""Spin-Hamiltonian levels, optical-hyperfine spectra, photophysics, and
fitting for a Kramers doublet coupled to an I=1/2 nucleus (171Yb:YVO4)."""

from ._ybspin import *  # noqa: F401,F403
from ._ybspin import __doc__  # noqa: F401

__version__ = "0.1.0"
