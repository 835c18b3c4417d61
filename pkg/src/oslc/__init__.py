"""Shaped lattice constellations for intensity-modulated optical links."""

__version__ = "0.1.0"
