"""Exact computational laboratory for Diestel-Leader graphs, their index-k
variants, the higher-rank lamplighter groups acting on them, and the
boundary-map machinery used to compare them up to quasi-isometry.

Everything is integer-exact and deterministic; no floating point enters any
verified quantity.
"""

__version__ = "0.1.0"
