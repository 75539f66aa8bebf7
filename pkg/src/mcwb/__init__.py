"""Exact multicut workbench for plane-embedded graphs."""

from .core import (
    INF,
    CapExceeded,
    DemandPattern,
    MulticutInstance,
    ValidationError,
    WeightedGraph,
    canonicalizeSolution,
    componentsOf,
    isMulticut,
)

__all__ = [
    "INF",
    "CapExceeded",
    "DemandPattern",
    "MulticutInstance",
    "ValidationError",
    "WeightedGraph",
    "canonicalizeSolution",
    "componentsOf",
    "isMulticut",
]
