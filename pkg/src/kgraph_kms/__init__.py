"""Desk-scale calculator for KMS, ground and critical-temperature states of
Nica-Toeplitz and Cuntz-Pimsner algebras attached to path-space shifts of
finite higher-rank graphs."""

from .degrees import Degree
from .kgraph import Edge, KGraph, Path

__all__ = ["Degree", "Edge", "KGraph", "Path"]
__version__ = "0.1.0"
