"""Spectral harmonic-analysis toolkit for resonant paraproduct estimates on the 3-torus."""

from .kernels import BACKEND
from .spectral import GridSpec, SpectralField

__version__ = "0.1.0"
__all__ = ["BACKEND", "GridSpec", "SpectralField", "__version__"]
