"""Quantum invariants of knots at roots of unity and the hyperbolic volume."""

__version__ = "0.1.0"

from .knot_diagram import DiagramError, KnotDiagram, parse_braid, reduce_diagram
from .state_sum import full_invariant, reduced_invariant
from .potential import build_potential
from .solver import newton_solve, solve_knot

__all__ = ["DiagramError", "KnotDiagram", "parse_braid", "reduce_diagram", "full_invariant",
           "reduced_invariant", "build_potential", "newton_solve",
           "solve_knot", "__version__"]
