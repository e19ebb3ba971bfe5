"""Weighted presheaf models of contextuality, with exact arithmetic."""

__version__ = "0.1.0"
