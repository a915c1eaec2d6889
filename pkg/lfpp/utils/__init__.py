"""Computational and I/O back-ends for LFPP Lab."""
