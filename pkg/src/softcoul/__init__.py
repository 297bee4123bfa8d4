"""Softened Coulomb potentials: transforms, spectra and time propagation."""

__version__ = "0.1.0"
