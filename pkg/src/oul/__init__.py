"""Spectral solution of Ornstein-Uhlenbeck processes and quadratic Lindbladians."""

__version__ = "0.1.0"
