"""Spatial branch-and-bound with minimum distance constraint reductions."""

from .errors import Infeasible

__all__ = ["Infeasible"]
__version__ = "0.1.0"
