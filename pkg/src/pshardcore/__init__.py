"""Contour, polymer, and cluster-expansion tools for the hard-core model on bipartite graphs."""

__version__ = "0.1.0"
