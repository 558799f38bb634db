"""Harmonic analysis on SE(2,N): representations, Fourier transforms, lifts,
almost-periodic interpolation, hypoelliptic diffusion and invariants."""

from .errors import SE2NError

__version__ = "0.1.0"
__all__ = ["SE2NError", "__version__"]
