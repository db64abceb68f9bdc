"""Loewner flows on hyperbolic surfaces: Moebius maps, Fuchsian groups, fields and flows."""

__version__ = "0.1.0"
