"""Random-walk-with-restart ego-nets and batched subgraph operators."""

from __future__ import annotations

from collections import deque

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


def component_sizes(adj: sp.csr_matrix) -> np.ndarray:
    """Size of the connected component containing each node."""
    _, comp = connected_components(adj, directed=False)
    return np.bincount(comp)[comp]


def _bfs_fill(adj, target, row, count, need):
    have = set(int(v) for v in row[:count])
    queue = deque([target])
    seen = {target}
    while queue and count < need:
        u = queue.popleft()
        for v in adj.indices[adj.indptr[u]:adj.indptr[u + 1]]:
            v = int(v)
            if v in seen:
                continue
            seen.add(v)
            queue.append(v)
            if v not in have:
                row[count] = v
                have.add(v)
                count += 1
                if count == need:
                    break
    return count


def rwr_egonets(adj: sp.csr_matrix, targets, size, rng, restart_prob=0.5, comp_sizes=None, max_steps=None):
    """Sample one ego-net per target by random walk with restart.

    Returns an int array of shape ``(len(targets), size)``. Row ``b`` starts
    with ``targets[b]`` followed by the other distinct nodes in first-visit
    order; it holds exactly ``min(size, component size)`` nodes and is padded
    with ``-1``. All walkers advance in lockstep. Walkers still short after
    ``max_steps`` are completed in breadth-first order from their target.
    """
    targets = np.asarray(targets, dtype=np.int64)
    m = len(targets)
    if comp_sizes is None:
        comp_sizes = component_sizes(adj)
    if max_steps is None:
        max_steps = 50 * size
    indptr, indices = adj.indptr, adj.indices
    out = np.full((m, size), -1, dtype=np.int64)
    out[:, 0] = targets
    count = np.ones(m, dtype=np.int64)
    need = np.minimum(size, comp_sizes[targets])
    cur = targets.copy()

    for _ in range(max_steps):
        active = np.flatnonzero(count < need)
        if active.size == 0:
            break
        at = cur[active]
        deg = indptr[at + 1] - indptr[at]
        jump = rng.random(active.size) < restart_prob
        pick = np.floor(rng.random(active.size) * deg).astype(np.int64)
        step = indices[indptr[at] + np.minimum(pick, deg - 1)]
        nxt = np.where(jump, targets[active], step)
        cur[active] = nxt
        fresh = ~(out[active] == nxt[:, None]).any(axis=1)
        rows = active[fresh]
        out[rows, count[rows]] = nxt[fresh]
        count[rows] += 1

    for b in np.flatnonzero(count < need):
        count[b] = _bfs_fill(adj, int(targets[b]), out[b], int(count[b]), int(need[b]))
    return out


def _edge_keys(adj):
    """Sorted ``row * n + col`` codes of the stored entries of a CSR matrix."""
    adj = adj if adj.has_sorted_indices else adj.sorted_indices()
    rows = np.repeat(np.arange(adj.shape[0], dtype=np.int64), np.diff(adj.indptr))
    return rows * adj.shape[0] + adj.indices


class SubgraphBatch:
    """Block-diagonal view of a batch of ego-nets for batched GCN passes.

    Row ``b * size + p`` of every operator corresponds to position ``p`` of
    ego-net ``b``. Padding slots carry zero features and only a self-loop.
    Target features (position 0) are masked to zero.

    Attributes
    ----------
    op : sparse (m*size, m*size)
        Per-subgraph normalized adjacency ``D^-1/2 (A_sub + I) D^-1/2``.
    features : ndarray (m*size, d)
        Gathered attributes with targets and padding zeroed.
    readout : sparse (m, m*size)
        Averages the non-target members of each ego-net.
    target_rows : ndarray (m,)
        Row index of each target inside the block layout.
    """

    def __init__(self, adj: sp.csr_matrix, attributes: np.ndarray, nodes: np.ndarray):
        m, size = nodes.shape
        valid = nodes >= 0
        safe = np.where(valid, nodes, 0)

        # induced adjacency among ego-net members, all position pairs at once
        pi, qi = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
        pi, qi = pi.ravel(), qi.ravel()
        off = pi != qi
        pi, qi = pi[off], qi[off]
        u = safe[:, pi].ravel()
        v = safe[:, qi].ravel()
        both = (valid[:, pi] & valid[:, qi]).ravel()
        keys = _edge_keys(adj)
        query = u * adj.shape[0] + v
        pos = np.minimum(np.searchsorted(keys, query), max(len(keys) - 1, 0))
        linked = keys[pos] == query if len(keys) else np.zeros(len(query), dtype=bool)
        keep = both & linked
        base = np.repeat(np.arange(m) * size, len(pi))
        rows = (base + np.tile(pi, m))[keep]
        cols = (base + np.tile(qi, m))[keep]
        total = m * size
        diag = np.arange(total)
        rows = np.concatenate([rows, diag])
        cols = np.concatenate([cols, diag])
        inv = 1.0 / np.sqrt(np.bincount(rows, minlength=total))
        self.op = sp.csr_matrix((inv[rows] * inv[cols], (rows, cols)), shape=(total, total))

        feats = attributes[safe.ravel()].copy()
        feats[~valid.ravel()] = 0.0
        feats[np.arange(m) * size] = 0.0
        self.features = feats

        members = valid.copy()
        members[:, 0] = False
        counts = members.sum(axis=1)
        r_rows, r_pos = np.nonzero(members)
        weights = 1.0 / counts[r_rows]
        self.readout = sp.csr_matrix((weights, (r_rows, r_rows * size + r_pos)), shape=(m, total))
        self.target_rows = np.arange(m) * size
        self.nodes = nodes
