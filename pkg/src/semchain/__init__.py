"""Chunked on-chain persistence simulator with best-of-n semantic reconstruction."""

__version__ = "0.1.0"
