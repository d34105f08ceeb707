"""Unitary differential space-time modulation with joint constellations."""

__version__ = "0.1.0"
