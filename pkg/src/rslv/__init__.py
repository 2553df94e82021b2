"""Verifier for a small resource-aware specification language."""

__version__ = "0.1.0"
