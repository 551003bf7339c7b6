"""Spectrum-preserving reduction of first-order sentences to bipartite graphs."""

__version__ = "0.1.0"
