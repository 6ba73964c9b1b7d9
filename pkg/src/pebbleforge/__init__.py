"""DAG constructions, pebbling games and exact pebbling oracles, and graph-labeling MHFs."""

from .graph import Dag, GraphError, NodeSet, load_graph, save_graph
from .pebbling import (
    BwPebbling,
    Pebbling,
    PebblingError,
    Violation,
    metrics,
    seq_transform,
    validate,
    validate_bw,
)

__version__ = "0.1.0"

__all__ = [
    "BwPebbling",
    "Dag",
    "GraphError",
    "NodeSet",
    "Pebbling",
    "PebblingError",
    "Violation",
    "load_graph",
    "metrics",
    "save_graph",
    "seq_transform",
    "validate",
    "validate_bw",
]
