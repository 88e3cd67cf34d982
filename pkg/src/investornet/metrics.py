"""Per-window snapshot metrics and the end-to-end analysis pipeline.

For every window and investor category the pipeline reports network size,
spanning-tree average weights (l_min, l_max), the mean correlation, and
three cross-window quantities: Jaccard overlap of active-investor sets,
mean absolute correlation change over shared nodes, and the active count
normalized by its full-run category mean.  The normalization denominator
is computed after all windows exist (two-pass); every other column depends
only on data up to its own window.
"""

from __future__ import annotations

import logging
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .corrnet import CorrelationNetwork, correlation_network
from .errors import DataError
from .ingest import (
    CATEGORY_TOKENS,
    MERGED,
    CategoryAssignment,
    TransactionRecord,
    aggregate_net_volumes,
    build_calendar,
    categorize,
)
from .spantree import average_tree_weight, spanning_trees
from .windows import PanelBuilder, Window, WindowSpec, enumerate_windows

log = logging.getLogger("investornet.metrics")

CATEGORY_ORDER = CATEGORY_TOKENS + (MERGED,)


@dataclass(frozen=True, slots=True)
class MetricsRow:
    """One (window, category) line of the output table."""

    window_index: int
    window_start: date
    window_end: date
    category: str
    n_active: int
    n_dropped: int
    l_min: float | None
    l_max: float | None
    avg_corr: float | None
    node_jaccard_prev: float | None
    edge_change_prev: float | None
    n_normalized: float | None


def node_jaccard(previous: frozenset[str] | set[str], current: frozenset[str] | set[str]) -> float | None:
    """|A intersect B| / |A union B|; undefined (None) when both sets are empty."""
    union = len(previous | current)
    if union == 0:
        return None
    return len(previous & current) / union


def edge_change(previous: CorrelationNetwork, current: CorrelationNetwork) -> float | None:
    """Mean |rho_now - rho_prev| over pairs of nodes present in both networks.

    Returns None when fewer than two nodes are shared, since no pair exists.
    """
    shared = sorted(set(previous.nodes) & set(current.nodes))
    if len(shared) < 2:
        return None
    prev_pos = {owner: k for k, owner in enumerate(previous.nodes)}
    curr_pos = {owner: k for k, owner in enumerate(current.nodes)}
    pi = np.array([prev_pos[o] for o in shared], dtype=np.intp)
    ci = np.array([curr_pos[o] for o in shared], dtype=np.intp)
    prev_sub = previous.weights[np.ix_(pi, pi)]
    curr_sub = current.weights[np.ix_(ci, ci)]
    iu, ju = np.triu_indices(len(shared), k=1)
    return float(np.mean(np.abs(curr_sub[iu, ju] - prev_sub[iu, ju])))


def average_edge_weight(network: CorrelationNetwork) -> float | None:
    """Mean correlation over all node pairs; None for degenerate networks."""
    n = network.n_nodes
    if n < 2:
        return None
    iu, ju = np.triu_indices(n, k=1)
    return float(np.mean(network.weights[iu, ju]))


def normalize_counts(counts: Sequence[int]) -> list[float]:
    """Divide each count by the arithmetic mean of the whole sequence."""
    if not counts:
        raise ValueError("cannot normalize an empty sequence")
    mean = sum(counts) / len(counts)
    if mean == 0:
        raise ValueError("cannot normalize: mean count is zero")
    return [c / mean for c in counts]


@dataclass(slots=True)
class _CellOutcome:
    """Everything a single (window, category) computation produces."""

    window: Window
    category: str
    active: frozenset[str]
    network: CorrelationNetwork
    n_dropped: int
    l_min: float | None
    l_max: float | None
    avg_corr: float | None
    tree_rows: list[tuple] = field(default_factory=list)
    node_rows: list[tuple] = field(default_factory=list)


@dataclass(slots=True)
class PipelineResult:
    rows: list[MetricsRow]
    windows: list[Window]
    dropped_owners: frozenset[str]
    category_mean_active: dict[str, float]
    tree_rows: list[tuple] = field(default_factory=list)
    node_rows: list[tuple] = field(default_factory=list)


def _compute_cell(
    builder: PanelBuilder,
    window: Window,
    category: str,
    collect_trees: bool,
    collect_nodes: bool,
) -> _CellOutcome:
    active = builder.active_owner_set(window, category)
    panel = builder.panel(window, category)
    network = correlation_network(panel)
    if network.n_nodes >= 2 and np.nanmax(np.abs(network.weights)) > 1.0:
        raise RuntimeError("correlation outside [-1, 1] escaped clamping")
    outcome = _CellOutcome(
        window=window,
        category=category,
        active=active,
        network=network,
        n_dropped=len(network.dropped_zero_variance),
        l_min=None,
        l_max=None,
        avg_corr=average_edge_weight(network),
    )
    if not network.degenerate:
        tree_min, tree_max = spanning_trees(network)
        outcome.l_min = average_tree_weight(tree_min)
        outcome.l_max = average_tree_weight(tree_max)
        if collect_trees:
            for tree in (tree_min, tree_max):
                kind = tree.kind.value
                for a, b, w in tree.edges:
                    outcome.tree_rows.append(
                        (window.index, window.end_date, category, kind, a, b, w)
                    )
    if collect_nodes:
        for owner, volume in zip(network.nodes, network.node_volume.tolist()):
            outcome.node_rows.append((window.index, category, owner, volume))
    return outcome


def run_pipeline(
    records: Sequence[TransactionRecord],
    spec: WindowSpec,
    category_mapping: Mapping[str, str],
    *,
    jobs: int = 1,
    collect_trees: bool = False,
    collect_nodes: bool = False,
    network_sink: Callable[[int, str, CorrelationNetwork], None] | None = None,
) -> PipelineResult:
    """Run the full analysis and return ordered metric rows.

    ``jobs`` bounds the worker threads used for per-(window, category)
    computation; results are merged in a fixed order so the output is
    identical for any job count.  ``network_sink`` receives each window's
    network in that same order when edge dumps are requested.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    assignment = categorize(records, category_mapping)
    retained = [r for r in records if r.owner_id in assignment.categories]
    if assignment.dropped_owners:
        log.info(
            "dropped %d owners with no category mapping", len(assignment.dropped_owners)
        )
    calendar = build_calendar(retained)
    series = aggregate_net_volumes(retained, calendar)
    builder = PanelBuilder(series, assignment, spec)
    windows = enumerate_windows(calendar, spec)
    log.info(
        "analyzing %d windows x %d categories over %d days, %d investors",
        len(windows),
        len(CATEGORY_ORDER),
        len(calendar),
        len(assignment.categories),
    )

    rows: list[MetricsRow] = []
    tree_rows: list[tuple] = []
    node_rows: list[tuple] = []
    counts: dict[str, list[int]] = {cat: [] for cat in CATEGORY_ORDER}
    prev_active: dict[str, frozenset[str]] = {}
    prev_network: dict[str, CorrelationNetwork] = {}

    def consume(outcome: _CellOutcome) -> None:
        window = outcome.window
        cat = outcome.category
        jac = None
        change = None
        if window.index > 0:
            jac = node_jaccard(prev_active[cat], outcome.active)
            change = edge_change(prev_network[cat], outcome.network)
        counts[cat].append(len(outcome.active))
        rows.append(
            MetricsRow(
                window_index=window.index,
                window_start=window.start_date,
                window_end=window.end_date,
                category=cat,
                n_active=len(outcome.active),
                n_dropped=outcome.n_dropped,
                l_min=outcome.l_min,
                l_max=outcome.l_max,
                avg_corr=outcome.avg_corr,
                node_jaccard_prev=jac,
                edge_change_prev=change,
                n_normalized=None,
            )
        )
        if collect_trees:
            tree_rows.extend(outcome.tree_rows)
        if collect_nodes:
            node_rows.extend(outcome.node_rows)
        if network_sink is not None:
            network_sink(window.index, cat, outcome.network)
        prev_active[cat] = outcome.active
        prev_network[cat] = outcome.network

    max_inflight = max(2, jobs + 1)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        pending: deque[list[Future]] = deque()
        window_iter = iter(windows)

        def submit_next() -> bool:
            window = next(window_iter, None)
            if window is None:
                return False
            pending.append(
                [
                    pool.submit(
                        _compute_cell, builder, window, cat, collect_trees, collect_nodes
                    )
                    for cat in CATEGORY_ORDER
                ]
            )
            return True

        for _ in range(max_inflight):
            if not submit_next():
                break
        while pending:
            futures = pending.popleft()
            outcomes = [f.result() for f in futures]
            for outcome in outcomes:
                consume(outcome)
            submit_next()

    means: dict[str, float] = {}
    for cat in CATEGORY_ORDER:
        series_counts = counts[cat]
        mean = sum(series_counts) / len(series_counts) if series_counts else 0.0
        means[cat] = mean
        if mean == 0:
            log.warning("category %s has no active investors in any window", cat)

    normalized_rows = [
        MetricsRow(
            window_index=r.window_index,
            window_start=r.window_start,
            window_end=r.window_end,
            category=r.category,
            n_active=r.n_active,
            n_dropped=r.n_dropped,
            l_min=r.l_min,
            l_max=r.l_max,
            avg_corr=r.avg_corr,
            node_jaccard_prev=r.node_jaccard_prev,
            edge_change_prev=r.edge_change_prev,
            n_normalized=(r.n_active / means[r.category]) if means[r.category] else None,
        )
        for r in rows
    ]

    violations = validate_rows(normalized_rows)
    if violations:
        raise RuntimeError(
            "internal metric validation failed: " + "; ".join(violations[:5])
        )
    return PipelineResult(
        rows=normalized_rows,
        windows=windows,
        dropped_owners=assignment.dropped_owners,
        category_mean_active=means,
        tree_rows=tree_rows,
        node_rows=node_rows,
    )


def validate_rows(rows: Iterable[MetricsRow]) -> list[str]:
    """Range and consistency checks over finished rows; returns violations."""
    problems: list[str] = []

    def flag(row: MetricsRow, message: str) -> None:
        problems.append(f"window {row.window_index} {row.category}: {message}")

    for row in rows:
        if row.n_active < 0 or row.n_dropped < 0:
            flag(row, "negative count")
        if row.window_start > row.window_end:
            flag(row, "window dates reversed")
        if row.window_index == 0:
            if row.node_jaccard_prev is not None or row.edge_change_prev is not None:
                flag(row, "first window must have null cross-window metrics")
        if row.node_jaccard_prev is not None and not 0.0 <= row.node_jaccard_prev <= 1.0:
            flag(row, f"jaccard {row.node_jaccard_prev} outside [0, 1]")
        if row.edge_change_prev is not None and not 0.0 <= row.edge_change_prev <= 2.0:
            flag(row, f"edge change {row.edge_change_prev} outside [0, 2]")
        for name in ("l_min", "l_max", "avg_corr"):
            value = getattr(row, name)
            if value is not None and not -1.0 <= value <= 1.0:
                flag(row, f"{name} {value} outside [-1, 1]")
        if row.l_min is not None and row.l_max is not None and row.l_min > row.l_max + 1e-12:
            flag(row, f"l_min {row.l_min} exceeds l_max {row.l_max}")
        if row.n_normalized is not None and row.n_normalized < 0:
            flag(row, "negative normalized count")
    return problems
