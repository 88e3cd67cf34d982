"""Pearson estimation and complete correlation-network construction."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import mk_panel
from investornet.corrnet import (
    CorrelationNetwork,
    correlation_network,
    network_from_weights,
    pearson,
)
from investornet.errors import ZeroVarianceError
from investornet.oracles import reference_pearson


# ---------------------------------------------------------------- pearson


def test_pearson_perfectly_aligned():
    assert pearson([1, 2, 3], [2, 4, 6]) == 1.0


def test_pearson_perfectly_opposed():
    assert pearson([1, 2, 3], [6, 4, 2]) == -1.0


def test_pearson_alternating_example():
    r = pearson([1, 0, 2, 0], [0, 1, 0, 2])
    assert r == pytest.approx(-9 / 11, abs=1e-12)


def test_pearson_self_correlation_is_one():
    rng = np.random.default_rng(0)
    x = rng.normal(size=50)
    assert pearson(x, x) == 1.0


def test_pearson_affine_invariance():
    rng = np.random.default_rng(1)
    x = rng.normal(size=126)
    y = rng.normal(size=126)
    base = pearson(x, y)
    assert pearson(3.5 * x + 11.0, y) == pytest.approx(base, abs=1e-9)
    assert pearson(x, 3.5 * x - 2.0) == pytest.approx(1.0, abs=1e-9)
    assert pearson(x, -0.5 * x + 7.0) == pytest.approx(-1.0, abs=1e-9)


def test_pearson_result_is_clamped():
    rng = np.random.default_rng(2)
    for _ in range(50):
        x = rng.normal(size=30)
        assert -1.0 <= pearson(x, 2.0 * x + rng.normal(size=30) * 1e-9) <= 1.0


def test_pearson_zero_variance_raises():
    with pytest.raises(ZeroVarianceError):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ZeroVarianceError):
        pearson([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])


def test_pearson_shape_errors():
    with pytest.raises(ValueError):
        pearson([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        pearson([1.0], [2.0])
    with pytest.raises(ValueError):
        pearson(np.zeros((2, 2)), np.zeros((2, 2)))


def test_pearson_matches_reference_at_mixed_scales():
    rng = np.random.default_rng(7)
    for _ in range(300):
        scale = 10.0 ** rng.integers(-2, 7)
        x = rng.normal(scale=scale, size=126)
        y = rng.normal(scale=scale, size=126)
        if rng.random() < 0.4:  # sparse, zero-heavy series like quiet traders
            x[rng.random(126) < 0.8] = 0.0
            y[rng.random(126) < 0.8] = 0.0
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            continue
        assert pearson(x, y) == pytest.approx(reference_pearson(x, y), abs=1e-10)


# ---------------------------------------------------------------- networks


def test_identical_rows_are_a_unit_edge():
    panel = mk_panel([[1, 2, 3, 4], [2, 4, 6, 8]], ["A", "B"])
    net = correlation_network(panel)
    assert net.nodes == ("A", "B")
    assert net.weights[0, 1] == 1.0
    assert net.weights[1, 0] == 1.0
    assert net.n_edges == 1
    assert not net.degenerate


def test_constant_rows_are_dropped_and_reported():
    panel = mk_panel([[1, 2, 3, 4], [0, 0, 0, 0], [4, 3, 2, 1]], ["A", "B", "C"])
    net = correlation_network(panel)
    assert net.nodes == ("A", "C")
    assert net.dropped_zero_variance == ("B",)
    assert net.weights.shape == (2, 2)
    assert net.weights[0, 1] == pytest.approx(-1.0)


def test_nonzero_constant_rows_also_dropped():
    panel = mk_panel([[5, 5, 5, 5], [1, 2, 3, 4]], ["A", "B"])
    net = correlation_network(panel)
    assert net.nodes == ("B",)
    assert net.degenerate


def test_network_is_complete_and_symmetric():
    rng = np.random.default_rng(4)
    panel = mk_panel(rng.normal(size=(4, 30)), ["A", "B", "C", "D"])
    net = correlation_network(panel)
    assert net.n_nodes == 4
    assert net.n_edges == 6
    w = net.weights
    assert np.allclose(w, w.T, equal_nan=True)
    assert np.all(np.isnan(np.diag(w)))
    off = w[~np.eye(4, dtype=bool)]
    assert np.all(off >= -1.0) and np.all(off <= 1.0)


def test_network_entries_match_pairwise_pearson():
    rng = np.random.default_rng(5)
    m = rng.integers(-40, 40, size=(5, 60)).astype(np.float64)
    net = correlation_network(mk_panel(m, list("ABCDE")))
    for i in range(5):
        for j in range(i + 1, 5):
            assert net.weights[i, j] == pytest.approx(pearson(m[i], m[j]), abs=1e-12)


def test_degenerate_networks_have_no_edges():
    one = correlation_network(mk_panel([[1, 2, 3]], ["A"]))
    assert one.degenerate and one.n_edges == 0 and one.nodes == ("A",)
    empty = correlation_network(mk_panel(np.zeros((0, 4)), []))
    assert empty.degenerate and empty.nodes == ()


def test_single_survivor_is_degenerate():
    panel = mk_panel([[1, 2, 3, 4], [7, 7, 7, 7]], ["A", "B"])
    net = correlation_network(panel)
    assert net.nodes == ("A",)
    assert net.degenerate
    assert net.dropped_zero_variance == ("B",)


def test_panel_width_must_allow_estimation():
    with pytest.raises(ValueError, match="width"):
        correlation_network(mk_panel([[1.0]], ["A"]))


def test_node_volume_follows_survivors():
    panel = mk_panel(
        [[1, 2, 3, 4], [0, 0, 0, 0], [4, 3, 2, 1]],
        ["A", "B", "C"],
        gross=[10, 20, 30],
    )
    net = correlation_network(panel)
    assert net.node_volume.tolist() == [10, 30]


def test_network_from_weights_defaults():
    w = np.array([[np.nan, 0.5], [0.5, np.nan]])
    net = network_from_weights(w)
    assert net.nodes == ("n0", "n1")
    assert isinstance(net, CorrelationNetwork)
    with pytest.raises(ValueError):
        network_from_weights(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        network_from_weights(np.zeros((2, 2)), nodes=["B", "A"])
