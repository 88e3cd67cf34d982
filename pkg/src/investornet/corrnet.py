"""Complete Pearson-correlation networks over window panels.

Each panel becomes a fully connected weighted graph: nodes are the window's
active investors, edge weights are pairwise Pearson correlations of their
smoothed daily net volumes.  Net volumes are used as-is (no scaling by gross
volume) and correlations are never transformed into distances here.
Constant (zero-variance) rows have no defined correlation; they are dropped
from the network and reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from investornet.errors import ZeroVarianceError
from investornet.windows import Window, WindowPanel


@dataclass(frozen=True)
class CorrelationNetwork:
    """One window's complete weighted graph for one category.

    ``weights`` is a symmetric ``N x N`` matrix with NaN on the diagonal
    (self-correlations are never edges).  ``node_volume[i]`` is node ``i``'s
    raw bought+sold share total inside the window.
    """

    window: Window | None
    category: str
    nodes: tuple[str, ...]
    weights: np.ndarray
    dropped_zero_variance: tuple[str, ...] = ()
    node_volume: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.node_volume is None:
            object.__setattr__(
                self, "node_volume", np.zeros(len(self.nodes), dtype=np.int64)
            )

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def degenerate(self) -> bool:
        return len(self.nodes) < 2

    @property
    def n_edges(self) -> int:
        n = len(self.nodes)
        return n * (n - 1) // 2


def pearson(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Product-moment correlation of two equal-length sequences, clamped to [-1, 1]."""
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    if ax.shape != ay.shape or ax.ndim != 1:
        raise ValueError("pearson expects two 1-d sequences of equal length")
    if ax.shape[0] < 2:
        raise ValueError("pearson needs at least 2 observations")
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVarianceError("undefined correlation: zero variance input")
    r = float(np.dot(dx, dy)) / np.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def correlation_network(panel: WindowPanel) -> CorrelationNetwork:
    """All-pairs correlation network of a panel.

    Zero-variance rows are removed first and recorded; if fewer than 2 rows
    survive the network is degenerate (no edges).  The weights matrix is
    computed in double precision with a two-pass scheme and clamped to
    [-1, 1]; the diagonal is NaN.
    """
    if panel.matrix.shape[0] and panel.matrix.shape[1] < 2:
        raise ValueError("panel width must be >= 2 to estimate correlations")
    variance_ok = np.ptp(panel.matrix, axis=1) != 0 if panel.matrix.size else np.zeros(0, bool)
    kept = np.flatnonzero(variance_ok)
    dropped = tuple(panel.investors[i] for i in np.flatnonzero(~variance_ok))
    nodes = tuple(panel.investors[i] for i in kept)
    volume = panel.gross_volume[kept] if len(panel.gross_volume) else panel.gross_volume

    if len(kept) < 2:
        weights = np.full((len(kept), len(kept)), np.nan)
        return CorrelationNetwork(
            window=panel.window,
            category=panel.category,
            nodes=nodes,
            weights=weights,
            dropped_zero_variance=dropped,
            node_volume=volume,
        )

    weights = np.corrcoef(panel.matrix[kept])
    np.clip(weights, -1.0, 1.0, out=weights)
    np.fill_diagonal(weights, np.nan)
    return CorrelationNetwork(
        window=panel.window,
        category=panel.category,
        nodes=nodes,
        weights=weights,
        dropped_zero_variance=dropped,
        node_volume=volume,
    )


def network_from_weights(
    weights: np.ndarray,
    nodes: Sequence[str] | None = None,
    *,
    category: str = "ADHOC",
) -> CorrelationNetwork:
    """Wrap a symmetric weights matrix as a network; used by selftests and tools."""
    w = np.array(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("weights must be a square matrix")
    if nodes is None:
        width = len(str(max(w.shape[0] - 1, 0)))
        nodes = tuple(f"n{i:0{width}d}" for i in range(w.shape[0]))
    else:
        nodes = tuple(nodes)
        if list(nodes) != sorted(nodes):
            raise ValueError("nodes must be in ascending order")
    np.fill_diagonal(w, np.nan)
    return CorrelationNetwork(window=None, category=category, nodes=nodes, weights=w)
