"""Exact engine for the j=0 bc-ghost system on rational and nodal curves."""

__version__ = "0.1.0"
