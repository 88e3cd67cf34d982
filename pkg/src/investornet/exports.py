"""Output writers: metrics tables, tree/node/network dumps, price series.

All files are written atomically (temp file in the target directory, then
rename), floats are printed with 12 significant digits, and missing metrics
are empty CSV fields / JSON nulls.  Writers never embed wall-clock data, so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from contextlib import contextmanager
from datetime import date
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

METRICS_HEADER = (
    "window_index,window_start,window_end,category,n_active,n_dropped,"
    "l_min,l_max,avg_corr,node_jaccard_prev,edge_change_prev,n_normalized"
)
TREES_HEADER = "window_index,window_end,category,kind,owner_a,owner_b,weight"
NODES_HEADER = "window_index,category,owner_id,node_volume"
NETWORKS_HEADER = "window_index,category,owner_a,owner_b,rho"
PRICE_HEADER = "date,price"


def fmt_float(value: float | None) -> str:
    """12-significant-digit text form; None becomes the empty field."""
    if value is None:
        return ""
    return format(value, ".12g")


def json_number(value: float | None) -> float | None:
    """Float carrying exactly the 12-significant-digit value printed to CSV."""
    if value is None:
        return None
    return float(format(value, ".12g"))


@contextmanager
def atomic_writer(path: str | Path) -> Iterator[IO[str]]:
    """Open a temp file next to ``path`` and rename it over on success."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(
        prefix=target.name + ".", suffix=".tmp", dir=target.parent
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_metrics_csv(rows: Iterable, path: str | Path) -> None:
    with atomic_writer(path) as fh:
        fh.write(METRICS_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for r in rows:
            w.writerow(
                [
                    r.window_index,
                    r.window_start.isoformat(),
                    r.window_end.isoformat(),
                    r.category,
                    r.n_active,
                    r.n_dropped,
                    fmt_float(r.l_min),
                    fmt_float(r.l_max),
                    fmt_float(r.avg_corr),
                    fmt_float(r.node_jaccard_prev),
                    fmt_float(r.edge_change_prev),
                    fmt_float(r.n_normalized),
                ]
            )


def write_metrics_json(rows: Iterable, path: str | Path) -> None:
    payload = [
        {
            "window_index": r.window_index,
            "window_start": r.window_start.isoformat(),
            "window_end": r.window_end.isoformat(),
            "category": r.category,
            "n_active": r.n_active,
            "n_dropped": r.n_dropped,
            "l_min": json_number(r.l_min),
            "l_max": json_number(r.l_max),
            "avg_corr": json_number(r.avg_corr),
            "node_jaccard_prev": json_number(r.node_jaccard_prev),
            "edge_change_prev": json_number(r.edge_change_prev),
            "n_normalized": json_number(r.n_normalized),
        }
        for r in rows
    ]
    with atomic_writer(path) as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def write_trees_csv(tree_rows: Iterable[Sequence], path: str | Path) -> None:
    """Rows of (window_index, window_end, category, kind, owner_a, owner_b, weight)."""
    with atomic_writer(path) as fh:
        fh.write(TREES_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for idx, end, cat, kind, a, b, weight in tree_rows:
            w.writerow([idx, end.isoformat(), cat, kind, a, b, fmt_float(weight)])


def write_nodes_csv(node_rows: Iterable[Sequence], path: str | Path) -> None:
    """Rows of (window_index, category, owner_id, node_volume)."""
    with atomic_writer(path) as fh:
        fh.write(NODES_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for idx, cat, owner, volume in node_rows:
            w.writerow([idx, cat, owner, int(volume)])


class NetworkDumpWriter:
    """Streams per-window edge lists; finalized atomically via ``close``.

    Edges are emitted with ``owner_a < owner_b`` and rho at 12 significant
    digits.  Callers must feed networks in output order.
    """

    def __init__(self, path: str | Path) -> None:
        self._target = Path(path)
        self._target.parent.mkdir(parents=True, exist_ok=True)
        fd, self._tmp = tempfile.mkstemp(
            prefix=self._target.name + ".", suffix=".tmp", dir=self._target.parent
        )
        self._fh = os.fdopen(fd, "w", encoding="utf-8", newline="")
        self._fh.write(NETWORKS_HEADER + "\n")

    def write_network(self, window_index: int, category: str, network) -> None:
        import numpy as np

        n = network.n_nodes
        if n < 2:
            return
        iu, ju = np.triu_indices(n, k=1)
        weights = network.weights[iu, ju]
        nodes = network.nodes
        out = self._fh
        for i, j, rho in zip(iu.tolist(), ju.tolist(), weights.tolist()):
            out.write(
                f"{window_index},{category},{nodes[i]},{nodes[j]},{format(rho, '.12g')}\n"
            )

    def close(self) -> None:
        self._fh.close()
        os.replace(self._tmp, self._target)

    def abort(self) -> None:
        self._fh.close()
        try:
            os.unlink(self._tmp)
        except OSError:
            pass


def write_price_csv(dates: Sequence[date], values: Sequence[float], path: str | Path) -> None:
    if len(dates) != len(values):
        raise ValueError("dates and values must align")
    with atomic_writer(path) as fh:
        fh.write(PRICE_HEADER + "\n")
        for d, v in zip(dates, values):
            fh.write(f"{d.isoformat()},{format(v, '.12g')}\n")
