"""Stress concentration between nearly touching rigid inclusions in a Lamé matrix."""

__version__ = "0.1.0"
