"""Command modules for LFPP Lab."""
