"""File writers: formats, null handling, and atomicity."""

from __future__ import annotations

import json
from datetime import date

import numpy as np
import pytest

from investornet.corrnet import network_from_weights
from investornet.exports import (
    METRICS_HEADER,
    NETWORKS_HEADER,
    NODES_HEADER,
    PRICE_HEADER,
    TREES_HEADER,
    NetworkDumpWriter,
    atomic_writer,
    fmt_float,
    json_number,
    write_metrics_csv,
    write_metrics_json,
    write_nodes_csv,
    write_price_csv,
    write_trees_csv,
)
from investornet.metrics import MetricsRow


def sample_rows():
    return [
        MetricsRow(
            window_index=0,
            window_start=date(1998, 1, 2),
            window_end=date(1998, 6, 26),
            category="HH",
            n_active=12,
            n_dropped=1,
            l_min=-0.25,
            l_max=0.5,
            avg_corr=0.125,
            node_jaccard_prev=None,
            edge_change_prev=None,
            n_normalized=1.0,
        ),
        MetricsRow(
            window_index=1,
            window_start=date(1998, 2, 2),
            window_end=date(1998, 7, 27),
            category="FI",
            n_active=0,
            n_dropped=0,
            l_min=None,
            l_max=None,
            avg_corr=None,
            node_jaccard_prev=0.5,
            edge_change_prev=0.0625,
            n_normalized=None,
        ),
    ]


def test_fmt_float():
    assert fmt_float(None) == ""
    assert fmt_float(0.5) == "0.5"
    assert fmt_float(1.0) == "1"
    assert fmt_float(-0.3333333333333333) == "-0.333333333333"
    assert len(fmt_float(2.0 / 3.0).lstrip("-0.")) <= 12


def test_json_number_mirrors_csv_precision():
    assert json_number(None) is None
    assert json_number(2.0 / 3.0) == float(fmt_float(2.0 / 3.0))


def test_metrics_csv_golden(tmp_path):
    path = tmp_path / "metrics.csv"
    write_metrics_csv(sample_rows(), path)
    text = path.read_text()
    assert text == (
        METRICS_HEADER + "\n"
        "0,1998-01-02,1998-06-26,HH,12,1,-0.25,0.5,0.125,,,1\n"
        "1,1998-02-02,1998-07-27,FI,0,0,,,,0.5,0.0625,\n"
    )


def test_metrics_json_mirrors_csv(tmp_path):
    path = tmp_path / "metrics.json"
    write_metrics_json(sample_rows(), path)
    payload = json.loads(path.read_text())
    assert len(payload) == 2
    assert list(payload[0]) == METRICS_HEADER.split(",")
    assert payload[0]["l_min"] == -0.25
    assert payload[0]["node_jaccard_prev"] is None
    assert payload[1]["l_max"] is None
    assert payload[1]["node_jaccard_prev"] == 0.5


def test_trees_and_nodes_csv(tmp_path):
    trees = tmp_path / "trees.csv"
    write_trees_csv(
        [(0, date(1998, 6, 26), "HH", "max", "A", "B", 0.875)],
        trees,
    )
    assert trees.read_text() == TREES_HEADER + "\n" + "0,1998-06-26,HH,max,A,B,0.875\n"
    nodes = tmp_path / "nodes.csv"
    write_nodes_csv([(0, "HH", "A", np.int64(42))], nodes)
    assert nodes.read_text() == NODES_HEADER + "\n" + "0,HH,A,42\n"


def test_price_csv(tmp_path):
    path = tmp_path / "price.csv"
    write_price_csv([date(1998, 1, 2), date(1998, 1, 5)], [10.0, 10.25], path)
    assert path.read_text() == PRICE_HEADER + "\n" + "1998-01-02,10\n1998-01-05,10.25\n"
    with pytest.raises(ValueError):
        write_price_csv([date(1998, 1, 2)], [1.0, 2.0], path)


def test_atomic_writer_success_and_failure(tmp_path):
    target = tmp_path / "out.txt"
    with atomic_writer(target) as fh:
        fh.write("done\n")
    assert target.read_text() == "done\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]

    boom = tmp_path / "boom.txt"
    with pytest.raises(RuntimeError):
        with atomic_writer(boom) as fh:
            fh.write("partial")
            raise RuntimeError("stop")
    assert not boom.exists()
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]  # no temp residue


def test_atomic_writer_overwrites_in_place(tmp_path):
    target = tmp_path / "out.txt"
    target.write_text("old")
    with atomic_writer(target) as fh:
        fh.write("new")
    assert target.read_text() == "new"


def test_network_dump_writer(tmp_path):
    path = tmp_path / "networks.csv"
    writer = NetworkDumpWriter(path)
    w = np.array([[np.nan, 0.5, -0.25], [0.5, np.nan, 0.75], [-0.25, 0.75, np.nan]])
    writer.write_network(0, "HH", network_from_weights(w, nodes=["A", "B", "C"]))
    degenerate = network_from_weights(np.full((1, 1), np.nan), nodes=["Z"])
    writer.write_network(0, "FI", degenerate)  # skipped: no edges
    writer.close()
    assert path.read_text() == (
        NETWORKS_HEADER + "\n"
        "0,HH,A,B,0.5\n"
        "0,HH,A,C,-0.25\n"
        "0,HH,B,C,0.75\n"
    )


def test_network_dump_writer_abort_leaves_nothing(tmp_path):
    path = tmp_path / "networks.csv"
    writer = NetworkDumpWriter(path)
    writer.write_network(
        0,
        "HH",
        network_from_weights(np.array([[np.nan, 0.5], [0.5, np.nan]]), nodes=["A", "B"]),
    )
    writer.abort()
    assert not path.exists()
    assert list(tmp_path.iterdir()) == []
