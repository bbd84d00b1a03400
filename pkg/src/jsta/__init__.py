"""Joint spatiotemporal amplitude simulation and retrieval for SPDC biphotons."""

__version__ = "0.1.0"
