"""Truthful scheduling on unrelated machines: mechanisms, WMON checks,
2x2 slice analysis and lower-bound certificates."""

__version__ = "0.1.0"
