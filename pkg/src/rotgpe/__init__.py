"""Spectral simulator for rotating condensates under strongly anisotropic
confinement: full 3D dynamics, averaged limit models, and effective
lower-dimensional equations, with convergence and conservation harnesses."""

__version__ = "0.1.0"
