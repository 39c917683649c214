"""
morse-graph-kit: exact graph complexes, combinatorial propagators and gradient-flow
counting for Morse-homotopy invariants of 3-manifolds.

The algebraic half (chain complexes, graph spaces, traces) is exact over the
rationals; the geometric half counts gradient-flow Θ graphs of Morse functions
on S³ numerically.

Basic Usage:
    from morse_graph_kit import BasedChainComplex, solve_propagator

    c = BasedChainComplex.elementary(0, ("p", "q"))
    g = solve_propagator(c)
    g.entry("q", "p")  # Fraction(1, 1)
"""

from importlib.metadata import PackageNotFoundError, version

from .chain import BasedChainComplex, GradedEndomorphism, solve_homotopy, solve_propagator
from .graph import ColorScheme, GraphVector, LabeledGraph, enumerate_graphs
from .invariant import CountsVector, ZClass, assemble_z, z23_pipeline
from .logs import configure_logging, get_logger, reset_configuration
from .morse import MorseSystem
from .theta import count_theta_flows
from .trace import TraceAssignment

try:
    __version__ = version("morse-graph-kit")
except PackageNotFoundError:
    # Source tree without an installed distribution (e.g. running tests against an uninstalled checkout).
    __version__ = "0.0.0+unknown"

__all__ = [
    "BasedChainComplex",
    "ColorScheme",
    "CountsVector",
    "GradedEndomorphism",
    "GraphVector",
    "LabeledGraph",
    "MorseSystem",
    "TraceAssignment",
    "ZClass",
    "assemble_z",
    "configure_logging",
    "count_theta_flows",
    "enumerate_graphs",
    "get_logger",
    "reset_configuration",
    "solve_homotopy",
    "solve_propagator",
    "z23_pipeline",
]
