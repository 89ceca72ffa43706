"""Expander decomposition through the cut-matching game.

The main entry points are :func:`decomp` for a full partition,
:func:`cut_matching` for a single game and :func:`trim` for turning a near
expander into an expander.
"""

from .cutmatching import BALANCED, CERTIFIED, UNBALANCED, CutMatchingOutcome, cut_matching
from .decomposition import Partition, certify, decomp, trim
from .errors import (ExpDecompError, InputError, InstanceTooSmall, InvariantViolation,
                     TrimContractError)
from .graph import (MultiGraph, SubdivisionGraph, conductance, cut_size, edge_expansion,
                    from_edges, induced_with_loops, parse_edge_list, read_edge_list,
                    subdivide, volume)
from .params import Params, make_params

__all__ = [
    "BALANCED", "CERTIFIED", "UNBALANCED", "CutMatchingOutcome", "cut_matching",
    "Partition", "certify", "decomp", "trim",
    "ExpDecompError", "InputError", "InstanceTooSmall", "InvariantViolation",
    "TrimContractError",
    "MultiGraph", "SubdivisionGraph", "conductance", "cut_size", "edge_expansion",
    "from_edges", "induced_with_loops", "parse_edge_list", "read_edge_list", "subdivide",
    "volume", "Params", "make_params",
]
__version__ = "0.1.0"
