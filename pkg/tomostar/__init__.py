"""Tomostar - tomographic star products and operator reconstruction."""

__version__ = "0.1.0"
