"""Exposure and robustness metrics for flat versus micro-segmented networks."""

__version__ = "0.1.0"
