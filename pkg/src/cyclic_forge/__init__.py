"""Generate and prove angle theorems about cyclic polygons."""

__version__ = "0.1.0"
