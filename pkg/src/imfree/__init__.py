"""Antiunitary symmetry tools for quantum multiparameter estimation."""

__version__ = "0.1.0"
