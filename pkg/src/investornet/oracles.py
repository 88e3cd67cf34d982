"""Independent reference implementations used to cross-check the fast paths.

These deliberately avoid the production code paths: the spanning-tree oracle
enumerates every labeled tree (via Prüfer sequences) and takes the extreme
total weight, and the correlation reference is a plain two-pass formula with
compensated summation.  The CLI ``selftest`` subcommand runs the same checks
that the test suite uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from heapq import heapify, heappop, heappush
from itertools import product
from typing import Sequence

import numpy as np


def reference_pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Two-pass Pearson correlation with fsum accumulation; no numpy."""
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need two equal-length sequences of length >= 2")
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(xs, ys))
    sxx = math.fsum((a - mx) ** 2 for a in xs)
    syy = math.fsum((b - my) ** 2 for b in ys)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("zero variance")
    return sxy / math.sqrt(sxx * syy)


def _prufer_to_edges(seq: tuple[int, ...], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for s in seq:
        degree[s] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapify(leaves)
    edges = []
    for s in seq:
        leaf = heappop(leaves)
        edges.append((min(leaf, s), max(leaf, s)))
        degree[s] -= 1
        if degree[s] == 1:
            heappush(leaves, s)
    u = heappop(leaves)
    v = heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return edges


@dataclass
class TreeEnumerator:
    """All spanning trees of complete graphs, cached per node count.

    For each ``n`` this stores a 0/1 incidence matrix of shape
    ``(n**(n-2), n*(n-1)/2)``; tree totals for a weight vector are then a
    single matrix product.  Practical for ``n <= 8``.
    """

    max_nodes: int = 8
    _incidence: dict[int, np.ndarray] = field(default_factory=dict)

    def incidence(self, n: int) -> np.ndarray:
        if n < 2 or n > self.max_nodes:
            raise ValueError(f"tree enumeration supports 2..{self.max_nodes} nodes")
        cached = self._incidence.get(n)
        if cached is not None:
            return cached
        pair_index = {}
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                pair_index[(i, j)] = k
                k += 1
        if n == 2:
            trees = [((0, 1),)]
        else:
            trees = [
                tuple(_prufer_to_edges(seq, n))
                for seq in product(range(n), repeat=n - 2)
            ]
        mat = np.zeros((len(trees), k), dtype=np.float64)
        for t, edges in enumerate(trees):
            for e in edges:
                mat[t, pair_index[e]] = 1.0
        self._incidence[n] = mat
        return mat

    def extreme_totals(self, weights: np.ndarray) -> tuple[float, float]:
        """(min, max) spanning-tree total weight by exhausting every tree."""
        n = weights.shape[0]
        iu, ju = np.triu_indices(n, k=1)
        totals = self.incidence(n) @ weights[iu, ju]
        return float(totals.min()), float(totals.max())

    def extreme_edge_sets(
        self, weights: np.ndarray
    ) -> tuple[frozenset[tuple[int, int]], frozenset[tuple[int, int]]]:
        """(min, max) spanning-tree edge sets by exhausting every tree.

        Only meaningful when the extremes are unique, i.e. when all edge
        weights are distinct; pairs are returned as ``(i, j)`` with ``i < j``.
        """
        n = weights.shape[0]
        iu, ju = np.triu_indices(n, k=1)
        mat = self.incidence(n)
        totals = mat @ weights[iu, ju]
        pairs = list(zip(iu.tolist(), ju.tolist()))

        def row_edges(row: int) -> frozenset[tuple[int, int]]:
            mask = mat[row] > 0.0
            return frozenset(p for p, used in zip(pairs, mask) if used)

        return row_edges(int(totals.argmin())), row_edges(int(totals.argmax()))


def random_symmetric_weights(
    rng: np.random.Generator, n: int, *, distinct: bool = True
) -> np.ndarray:
    """Symmetric weight matrix with entries in (-1, 1) and NaN diagonal."""
    while True:
        vals = rng.uniform(-1.0, 1.0, size=n * (n - 1) // 2)
        if not distinct or len(np.unique(vals)) == len(vals):
            break
    w = np.full((n, n), np.nan)
    iu, ju = np.triu_indices(n, k=1)
    w[iu, ju] = vals
    w[ju, iu] = vals
    return w


@dataclass
class SelftestReport:
    passed: int = 0
    failed: int = 0
    failures: list[str] = field(default_factory=list)

    def record(self, ok: bool, label: str) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 20:
                self.failures.append(label)

    @property
    def ok(self) -> bool:
        return self.failed == 0


def run_selftest(
    iterations: int = 1000, seed: int = 20260823, *, inject_fault: bool = False
) -> SelftestReport:
    """Cross-check the tree and correlation paths against the oracles.

    ``inject_fault`` flips one tree comparison to verify that failures are
    detected and reported; it exists for exercising the CLI exit path.
    """
    from investornet.corrnet import network_from_weights, pearson
    from investornet.spantree import distance_transform, max_spanning_tree, min_spanning_tree

    rng = np.random.default_rng(seed)
    enum = TreeEnumerator()
    report = SelftestReport()

    for i in range(iterations):
        n = int(rng.integers(2, 8))
        weights = random_symmetric_weights(rng, n)
        net = network_from_weights(weights)
        lo, hi = enum.extreme_totals(weights)
        tmin = min_spanning_tree(net)
        tmax = max_spanning_tree(net)
        got_lo = tmin.total_weight()
        if inject_fault and i == 0:
            got_lo += 1e-3
        report.record(math.isclose(got_lo, lo, rel_tol=0.0, abs_tol=1e-12),
                      f"min-tree total mismatch (case {i}, n={n})")
        report.record(math.isclose(tmax.total_weight(), hi, rel_tol=0.0, abs_tol=1e-12),
                      f"max-tree total mismatch (case {i}, n={n})")
        dual = min_spanning_tree(distance_transform(net))
        report.record(dual.edge_set() == tmax.edge_set(),
                      f"distance-transform duality mismatch (case {i}, n={n})")

    for i in range(iterations):
        length = int(rng.integers(2, 200))
        scale = 10.0 ** rng.integers(0, 7)
        x = rng.normal(0.0, scale, size=length)
        y = rng.normal(0.0, scale, size=length)
        if rng.random() < 0.3:
            x[rng.random(length) < 0.7] = 0.0
            y[rng.random(length) < 0.7] = 0.0
        try:
            expected = reference_pearson(x, y)
        except ValueError:
            continue
        got = pearson(x, y)
        clipped = min(1.0, max(-1.0, expected))
        report.record(abs(got - clipped) <= 1e-10,
                      f"pearson mismatch (case {i}, len={length})")
    return report
