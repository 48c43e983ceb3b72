"""Connected components by vectorized union-find, plus a BFS oracle."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


def _compress(parent):
    while True:
        nxt = parent[parent]
        if np.array_equal(nxt, parent):
            return parent
        parent = nxt


def union_find_roots(n: int, edges) -> np.ndarray:
    """Root of every vertex after merging all edges.

    Hook-and-compress union-find: each round hooks the larger root under the
    smaller one for every edge that still spans two trees, then flattens the
    forest with pointer jumping. Parents only ever decrease, so no cycles form.
    """
    parent = np.arange(n, dtype=np.int64)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    u, v = edges[:, 0], edges[:, 1]
    while len(u):
        pu, pv = parent[u], parent[v]
        live = pu != pv
        if not live.any():
            break
        u, v, pu, pv = u[live], v[live], pu[live], pv[live]
        np.minimum.at(parent, np.maximum(pu, pv), np.minimum(pu, pv))
        parent = _compress(parent)
    return parent


@dataclass
class Components:
    """Labeling with component 0 the largest; ties go to the smaller minimum id."""

    labels: np.ndarray  # component index per vertex
    sizes: np.ndarray  # sizes in label order

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def size_L1(self) -> int:
        return int(self.sizes[0]) if len(self.sizes) else 0

    @property
    def size_L2(self) -> int:
        return int(self.sizes[1]) if len(self.sizes) > 1 else 0

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


def connected_components(graph_or_n, edges=None) -> Components:
    if edges is None:
        n, edges = graph_or_n.n_vertices, graph_or_n.edges
    else:
        n = int(graph_or_n)
    if n == 0:
        return Components(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    roots = union_find_roots(n, edges)
    # roots are the minimum ids of their components
    uniq, inverse, sizes = np.unique(roots, return_inverse=True, return_counts=True)
    order = np.lexsort((uniq, -sizes))
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return Components(rank[inverse], sizes[order])


def bfs_components(n: int, edges) -> Components:
    """Plain BFS labeling used to cross-check the union-find."""
    adj = [[] for _ in range(n)]
    for a, b in np.asarray(edges, dtype=np.int64).reshape(-1, 2).tolist():
        adj[a].append(b)
        adj[b].append(a)
    comp = [-1] * n
    groups = []
    for s in range(n):
        if comp[s] != -1:
            continue
        comp[s] = len(groups)
        members = [s]
        q = deque([s])
        while q:
            x = q.popleft()
            for y in adj[x]:
                if comp[y] == -1:
                    comp[y] = comp[s]
                    members.append(y)
                    q.append(y)
        groups.append(members)
    order = sorted(range(len(groups)), key=lambda g: (-len(groups[g]), min(groups[g])))
    rank = {g: k for k, g in enumerate(order)}
    labels = np.array([rank[c] for c in comp], dtype=np.int64)
    sizes = np.array([len(groups[g]) for g in order], dtype=np.int64)
    return Components(labels, sizes)


def bfs_reachable(graph, source: int, allowed=None) -> np.ndarray:
    """Vertices reachable from source, optionally only through an allowed mask."""
    indptr, indices = graph.adjacency
    seen = np.zeros(graph.n_vertices, dtype=bool)
    seen[source] = True
    q = deque([source])
    while q:
        x = q.popleft()
        for y in indices[indptr[x]:indptr[x + 1]].tolist():
            if not seen[y] and (allowed is None or allowed[y]):
                seen[y] = True
                q.append(y)
    return np.flatnonzero(seen)
