"""LFPP Lab - Liouville first passage percolation simulations and exponent bounds."""

__version__ = "0.1.0"
