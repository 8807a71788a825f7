"""NumPy fallback for the tree-pass kernels.

The loops below mirror the compiled versions operation-for-operation so the
two backends produce bit-identical float64 results.
"""

import numpy as np


def path_sums(parent, order, terms):
    """Accumulate per-node terms along every root-to-node path.

    out[v] = terms[v] + out[parent[v]], processed in topological order
    (parents before children). `terms` may be (N,) or (B, N); the node
    axis is last.
    """
    terms = np.ascontiguousarray(terms, dtype=np.float64)
    out = terms.copy()
    if terms.ndim == 1:
        for i in range(1, order.shape[0]):
            v = order[i]
            out[v] += out[parent[v]]
    else:
        for i in range(1, order.shape[0]):
            v = order[i]
            out[:, v] += out[:, parent[v]]
    return out


def subtree_sums(parent, order, values):
    """Sum per-node values over every node's subtree (node included).

    out[v] = values[v] + sum of out[c] over children c, accumulated by a
    single reverse-topological pass. `values` may be (N,) or (B, N).
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    out = values.copy()
    if values.ndim == 1:
        for i in range(order.shape[0] - 1, 0, -1):
            v = order[i]
            out[parent[v]] += out[v]
    else:
        for i in range(order.shape[0] - 1, 0, -1):
            v = order[i]
            out[:, parent[v]] += out[:, v]
    return out
