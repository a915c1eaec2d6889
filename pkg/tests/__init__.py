"""Tests for ML Platform CLI."""
