"""Fully dynamic c-edge-connectivity engine for multigraphs."""

__version__ = "0.1.0"
