"""Universal one-dimensional partitioned quantum cellular automata toolkit."""

from .core import (
    Alphabet,
    Configuration,
    ScatteringUnitary,
    SparseState,
    Trajectory,
    SIM,
    STRONG,
    WEAK,
    canonicalize,
    evolve,
    group_view,
    inner_product,
    shift,
    step,
)

__all__ = [
    "Alphabet",
    "Configuration",
    "ScatteringUnitary",
    "SparseState",
    "Trajectory",
    "SIM",
    "STRONG",
    "WEAK",
    "canonicalize",
    "evolve",
    "group_view",
    "inner_product",
    "shift",
    "step",
]

__version__ = "0.1.0"
