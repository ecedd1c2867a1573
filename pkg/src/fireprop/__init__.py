"""Fire propagation on configuration-model multigraphs."""

__version__ = "0.1.0"
