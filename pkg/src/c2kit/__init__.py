"""c2 invariants of decompleted circulant graphs, computed along several independent routes."""

__version__ = "0.1.0"
