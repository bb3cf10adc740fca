"""Exact and asymptotic M2-rank statistics for partitions without repeated odd parts."""

__version__ = "0.1.0"
