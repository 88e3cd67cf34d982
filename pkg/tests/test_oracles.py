"""The embedded reference implementations and the wired-in selftest."""

from __future__ import annotations

import numpy as np
import pytest

from investornet.oracles import (
    TreeEnumerator,
    random_symmetric_weights,
    reference_pearson,
    run_selftest,
)


def test_reference_pearson_agrees_with_numpy():
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.normal(scale=10.0 ** rng.integers(0, 5), size=60)
        y = rng.normal(scale=10.0 ** rng.integers(0, 5), size=60)
        want = np.corrcoef(x, y)[0, 1]
        assert reference_pearson(x, y) == pytest.approx(want, abs=1e-12)


def test_enumerator_counts_all_labeled_trees():
    enum = TreeEnumerator()
    # Cayley: n^(n-2) labeled trees on n nodes
    for n, count in ((2, 1), (3, 3), (4, 16), (5, 125)):
        mat = enum.incidence(n)
        assert mat.shape == (count, n * (n - 1) // 2)
        assert np.all(mat.sum(axis=1) == n - 1)
        # no duplicate trees
        assert len({tuple(row) for row in mat.astype(int).tolist()}) == count


def test_enumerator_rejects_out_of_range():
    enum = TreeEnumerator()
    with pytest.raises(ValueError):
        enum.incidence(1)
    with pytest.raises(ValueError):
        enum.incidence(9)


def test_extreme_edge_sets_agree_with_extreme_totals():
    rng = np.random.default_rng(5)
    enum = TreeEnumerator()
    for _ in range(100):
        n = int(rng.integers(2, 8))
        w = random_symmetric_weights(rng, n)
        lo, hi = enum.extreme_totals(w)
        set_lo, set_hi = enum.extreme_edge_sets(w)
        assert sum(w[i, j] for i, j in set_lo) == pytest.approx(lo, abs=1e-12)
        assert sum(w[i, j] for i, j in set_hi) == pytest.approx(hi, abs=1e-12)
        assert len(set_lo) == len(set_hi) == n - 1


def test_random_weights_are_symmetric_and_distinct():
    rng = np.random.default_rng(6)
    w = random_symmetric_weights(rng, 6)
    assert np.allclose(w, w.T, equal_nan=True)
    assert np.all(np.isnan(np.diag(w)))
    iu, ju = np.triu_indices(6, k=1)
    vals = w[iu, ju]
    assert len(np.unique(vals)) == len(vals)
    assert np.all(np.abs(vals) < 1.0)


def test_selftest_passes_clean():
    report = run_selftest(iterations=50)
    assert report.ok
    assert report.failed == 0
    assert report.passed > 0
    assert report.failures == []


def test_selftest_detects_injected_fault():
    report = run_selftest(iterations=50, inject_fault=True)
    assert not report.ok
    assert report.failed > 0
    assert report.failures


def test_selftest_is_deterministic():
    a = run_selftest(iterations=20)
    b = run_selftest(iterations=20)
    assert (a.passed, a.failed) == (b.passed, b.failed)
