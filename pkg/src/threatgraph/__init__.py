"""Layered threat/vulnerability knowledge graph with an experiment harness
for technique/attack-pattern link prediction."""

from .graph import Direction, Layer, NodeId, ThreatGraph, ThreatNode

__version__ = "0.1.0"

__all__ = [
    "Direction",
    "Layer",
    "NodeId",
    "ThreatGraph",
    "ThreatNode",
    "__version__",
]
