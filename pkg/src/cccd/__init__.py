"""Catch digraphs on interval data: domination numbers, exact laws, limits."""

__version__ = "0.1.0"

from . import asymptotics, densities, digraph, exact, multianchor, simulate

__all__ = [
    "asymptotics",
    "densities",
    "digraph",
    "exact",
    "multianchor",
    "simulate",
]
