"""Conversions from ``Dag`` to the flat arrays the compiled kernels consume."""

import numpy as np

from .graph import Dag


def parent_masks(g: Dag) -> np.ndarray:
    """int64 parent bitmasks indexed by 0-based node; requires n <= 62."""
    if g.n > 62:
        raise ValueError("bitmask kernels support at most 62 nodes")
    return np.array([g.parent_mask(v) for v in range(1, g.n + 1)], dtype=np.int64)


def csr_parents(g: Dag) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR parent lists (0-based) plus a boolean mask of nodes outside a view."""
    ptr = np.zeros(g.n + 1, dtype=np.int64)
    flat = []
    for v in range(1, g.n + 1):
        ps = g.parent_list(v)
        flat.extend(u - 1 for u in ps)
        ptr[v] = ptr[v - 1] + len(ps)
    idx = np.array(flat, dtype=np.int64)
    present = g.nodes().mask
    absent = np.array([not (present >> v) & 1 for v in range(g.n)], dtype=np.bool_)
    return ptr, idx, absent
