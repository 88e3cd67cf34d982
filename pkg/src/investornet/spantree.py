"""Minimum and maximum spanning trees of correlation networks.

Kruskal's algorithm with union-find (path compression + union by rank).
Edges are ranked by ``(weight, owner_a, owner_b)`` with ``owner_a < owner_b``,
so trees are deterministic even under tied correlations.  Correlations are
used directly as weights; the square-root distance transform is provided only
as a checking utility, since the tree edge set is invariant under it.

For large complete graphs the edge list is pruned with a partition pass
before sorting: Kruskal only consumes edges up to the tree's bottleneck
weight, so candidates are grown geometrically (closing over ties at the
cut-off) until the tree completes.  The result is identical to sorting the
full edge list.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from investornet.corrnet import CorrelationNetwork
from investornet.errors import DegenerateNetworkError
from investornet.windows import Window

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


class TreeKind(Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class SpanningTree:
    """A spanning tree's edge set and its average weight."""

    window: Window | None
    category: str
    kind: TreeKind
    edges: tuple[tuple[str, str, float], ...]
    average_weight: float

    @property
    def n_nodes(self) -> int:
        return len(self.edges) + 1

    def edge_set(self) -> frozenset[tuple[str, str]]:
        return frozenset((a, b) for a, b, _ in self.edges)

    def total_weight(self) -> float:
        return self.average_weight * len(self.edges)


def _uf_accept_py(n: int, ei: np.ndarray, ej: np.ndarray, out: np.ndarray) -> int:
    parent = list(range(n))
    rank = [0] * n
    count = 0
    target = n - 1
    for k in range(len(ei)):
        a = ei[k]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = ej[k]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a == b:
            continue
        if rank[a] < rank[b]:
            a, b = b, a
        parent[b] = a
        if rank[a] == rank[b]:
            rank[a] += 1
        out[count] = k
        count += 1
        if count == target:
            break
    return count


if _HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _uf_accept_jit(n, ei, ej, out):  # pragma: no cover - exercised via wrapper
        parent = np.arange(n, dtype=np.int64)
        rank = np.zeros(n, dtype=np.int64)
        count = 0
        target = n - 1
        for k in range(len(ei)):
            a = ei[k]
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            b = ej[k]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                continue
            if rank[a] < rank[b]:
                a, b = b, a
            parent[b] = a
            if rank[a] == rank[b]:
                rank[a] += 1
            out[count] = k
            count += 1
            if count == target:
                break
        return count

    def _uf_accept(n: int, ei: np.ndarray, ej: np.ndarray, out: np.ndarray) -> int:
        return int(_uf_accept_jit(n, ei, ej, out))

else:  # pragma: no cover
    _uf_accept = _uf_accept_py


def _kruskal_order(
    n: int, iu: np.ndarray, ju: np.ndarray, key: np.ndarray
) -> np.ndarray:
    """Indices of the accepted edges for ascending traversal of ``key``."""
    n_edges = len(key)
    out = np.empty(n - 1, dtype=np.int64)
    limit = min(n_edges, max(256, 4 * n))
    while True:
        if limit < n_edges:
            part = np.argpartition(key, limit - 1)[:limit]
            cutoff = key[part].max()
            cand = np.flatnonzero(key <= cutoff)  # close over ties at the cut-off
        else:
            cand = np.arange(n_edges)
        order = cand[np.lexsort((ju[cand], iu[cand], key[cand]))]
        accepted = _uf_accept(n, iu[order], ju[order], out)
        if accepted == n - 1 or limit >= n_edges:
            return order[out[:accepted]]
        limit = min(n_edges, limit * 8)


def _edge_arrays(network: CorrelationNetwork) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = network.n_nodes
    iu, ju = np.triu_indices(n, k=1)
    return iu, ju, network.weights[iu, ju]


def _build_tree(
    network: CorrelationNetwork,
    kind: TreeKind,
    iu: np.ndarray,
    ju: np.ndarray,
    w: np.ndarray,
) -> SpanningTree:
    n = network.n_nodes
    key = -w if kind is TreeKind.MAX else w
    picked = _kruskal_order(n, iu, ju, key)
    nodes = network.nodes
    edges = tuple(
        (nodes[iu[k]], nodes[ju[k]], float(w[k])) for k in picked
    )
    total = float(np.sum(w[picked]))
    return SpanningTree(
        window=network.window,
        category=network.category,
        kind=kind,
        edges=edges,
        average_weight=total / (n - 1),
    )


def spanning_trees(network: CorrelationNetwork) -> tuple[SpanningTree, SpanningTree]:
    """Min and max spanning trees sharing one edge-list extraction."""
    if network.n_nodes < 2:
        raise DegenerateNetworkError(
            f"degenerate network: {network.n_nodes} node(s), no spanning tree"
        )
    iu, ju, w = _edge_arrays(network)
    return (
        _build_tree(network, TreeKind.MIN, iu, ju, w),
        _build_tree(network, TreeKind.MAX, iu, ju, w),
    )


def min_spanning_tree(network: CorrelationNetwork) -> SpanningTree:
    """Spanning tree minimizing the summed edge weights."""
    if network.n_nodes < 2:
        raise DegenerateNetworkError(
            f"degenerate network: {network.n_nodes} node(s), no spanning tree"
        )
    iu, ju, w = _edge_arrays(network)
    return _build_tree(network, TreeKind.MIN, iu, ju, w)


def max_spanning_tree(network: CorrelationNetwork) -> SpanningTree:
    """Spanning tree maximizing the summed edge weights."""
    if network.n_nodes < 2:
        raise DegenerateNetworkError(
            f"degenerate network: {network.n_nodes} node(s), no spanning tree"
        )
    iu, ju, w = _edge_arrays(network)
    return _build_tree(network, TreeKind.MAX, iu, ju, w)


def average_tree_weight(tree: SpanningTree) -> float:
    """Summed edge weight divided by the edge count (node count minus one)."""
    if not tree.edges:
        raise ValueError("empty tree has no average weight")
    return sum(w for _, _, w in tree.edges) / len(tree.edges)


def distance_transform(network: CorrelationNetwork) -> CorrelationNetwork:
    """Map weights through d = sqrt(2 (1 - rho)); checking utility only.

    The transform reverses the rank order of edge weights, turning maximum
    spanning trees into minimum ones with the same edge set.  The analysis
    pipeline never applies it.
    """
    w = np.sqrt(np.clip(2.0 * (1.0 - network.weights), 0.0, None))
    return CorrelationNetwork(
        window=network.window,
        category=network.category,
        nodes=network.nodes,
        weights=w,
        dropped_zero_variance=network.dropped_zero_variance,
        node_volume=network.node_volume,
    )
