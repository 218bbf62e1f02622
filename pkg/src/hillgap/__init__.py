"""Spectral laboratory for Hill's equation y'' + (lambda - q) y = 0."""
