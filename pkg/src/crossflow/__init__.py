"""Crossing pedestrian flows: lattice, compartment and continuum models."""

__version__ = "0.1.0"
