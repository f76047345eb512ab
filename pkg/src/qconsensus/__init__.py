"""Quantized consensus of linear multi-agent systems under DoS packet loss."""

from . import conditions, dos, graphs, matrixtools, quantizer, scenario, simulation

__all__ = [
    "conditions",
    "dos",
    "graphs",
    "matrixtools",
    "quantizer",
    "scenario",
    "simulation",
]

__version__ = "0.1.0"
