"""Fill-reducing symmetric ordering (minimum degree on the explicit elimination graph).

Nodes whose degree exceeds ``max(16, 10 sqrt(n))`` are taken out before the
elimination and ordered last, as AMD does for dense rows; this keeps the
elimination graph small when ``A`` has dense rows or columns.
"""

from __future__ import annotations

import heapq
import math

import numpy as np
import scipy.sparse as sp


def minimum_degree(pattern: sp.spmatrix, dense_threshold: float | None = None) -> np.ndarray:
    """Return a permutation ``perm`` (new position -> old index)."""
    S = sp.csr_matrix(pattern, dtype=bool)
    n = S.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    S = (S + S.T).tocsr()
    S.setdiag(False)
    S.eliminate_zeros()
    deg0 = np.diff(S.indptr)
    if dense_threshold is None:
        dense_threshold = max(16.0, 10.0 * math.sqrt(n))
    dense = deg0 > dense_threshold
    adj = [None] * n
    for v in range(n):
        if not dense[v]:
            nb = S.indices[S.indptr[v]:S.indptr[v + 1]]
            adj[v] = set(int(u) for u in nb if not dense[u])
    heap = [(len(adj[v]), v) for v in range(n) if not dense[v]]
    heapq.heapify(heap)
    eliminated = np.zeros(n, dtype=bool)
    order = []
    while heap:
        d, v = heapq.heappop(heap)
        if eliminated[v] or d != len(adj[v]):
            continue
        eliminated[v] = True
        order.append(v)
        nbrs = adj[v]
        for u in nbrs:
            au = adj[u]
            au.discard(v)
            au |= nbrs
            au.discard(u)
            heapq.heappush(heap, (len(au), u))
        adj[v] = None
    tail = np.flatnonzero(dense)
    tail = tail[np.argsort(deg0[tail], kind="stable")]
    return np.concatenate([np.asarray(order, dtype=np.int64), tail.astype(np.int64)])
