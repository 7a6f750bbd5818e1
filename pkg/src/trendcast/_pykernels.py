"""Pure-numpy hot kernels; fallback when the compiled extension is not built.

All kernels take the per-node CSR layout: `indptr` (int64, length n+1) and
`days` (int32, ascending within each node's segment), plus `link_node`
(int32, the owning node index of every flat slot).
"""

import numpy as np

BACKEND = "py"

# day indices must fit the packed (node, day) keys used by the grouped kernel
DAY_BITS = 21
MAX_DAY = (1 << DAY_BITS) - 1


def prefix_counts(indptr, days, link_node, t):
    """Per-node count of link days <= t."""
    n = indptr.shape[0] - 1
    mask = days <= t
    return np.bincount(link_node[mask], minlength=n).astype(np.int64, copy=False)


def decay_scores(indptr, days, link_node, t, gamma):
    """Per-node sum of exp(gamma * (day - t)) over link days <= t.

    bincount accumulates in flat-array order, i.e. oldest day first within
    each node, matching the compiled backend.
    """
    n = indptr.shape[0] - 1
    mask = days <= t
    w = np.exp(gamma * (days[mask].astype(np.float64) - t))
    return np.bincount(link_node[mask], weights=w, minlength=n)


def decay_scores_grouped(indptr, days, link_node, t, gamma):
    """Day-grouped variant: one exp per distinct (node, day), weighted by the
    day's link count. Equivalent to decay_scores within rounding."""
    n = indptr.shape[0] - 1
    mask = days <= t
    keys = (link_node[mask].astype(np.int64) << DAY_BITS) | days[mask].astype(np.int64)
    uniq, counts = np.unique(keys, return_counts=True)
    nodes = (uniq >> DAY_BITS).astype(np.intp)
    day_vals = (uniq & MAX_DAY).astype(np.float64)
    w = counts * np.exp(gamma * (day_vals - t))
    return np.bincount(nodes, weights=w, minlength=n)
