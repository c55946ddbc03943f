"""Volumes of moduli spaces of flat U(n)-connections via colored honeycombs."""

__version__ = "0.1.0"
