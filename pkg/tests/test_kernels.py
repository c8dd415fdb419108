"""Compiled and numpy kernels must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lvef import _core
from lvef._core import backends

BOTH = backends()
needs_compiled = pytest.mark.skipif("cython" not in BOTH, reason="compiled backend not built")

series = arrays(np.float64, st.integers(0, 80), elements=st.integers(0, 6).map(float))


def _equal(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def test_backend_selected_at_import():
    assert _core.BACKEND in ("cython", "python")
    assert _core.local_maxima is BOTH[_core.BACKEND].local_maxima


@needs_compiled
@settings(max_examples=300, deadline=None)
@given(series)
def test_peak_kernels_agree(x):
    py, cy = BOTH["python"], BOTH["cython"]
    peaks = py.local_maxima(x)
    assert _equal(peaks, cy.local_maxima(x))
    assert _equal(py.peak_prominences(x, peaks), cy.peak_prominences(x, peaks))
    for d in (1, 2, 5, 20):
        assert _equal(py.select_by_distance(peaks, x[peaks], d), cy.select_by_distance(peaks, x[peaks], d))


@needs_compiled
@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 12), st.just(2)),
              elements=st.floats(0, 30, allow_nan=False).map(lambda v: round(v, 2))))
def test_fill_polygon_agrees(poly):
    py, cy = BOTH["python"], BOTH["cython"]
    assert _equal(py.fill_polygon(poly[:, 0], poly[:, 1], 32, 32), cy.fill_polygon(poly[:, 0], poly[:, 1], 32, 32))


@needs_compiled
def test_split_and_tree_kernels_agree(rng):
    py, cy = BOTH["python"], BOTH["cython"]
    for trial in range(20):
        n = int(rng.integers(2, 200))
        x = np.sort(rng.integers(0, 20, n).astype(float))
        y = rng.normal(size=n)
        w = rng.uniform(0.1, 2.0, n)
        assert _equal(py.best_split(x, y, w), cy.best_split(x, y, w))
        X = rng.integers(0, 8, size=(n, 3)).astype(float)
        u = rng.random(4 * X.size + 1)
        for max_features, depth in ((0, -1), (2, -1), (0, 3)):
            a = py.fit_random_tree(X, y, u, max_features, depth, 2)
            b = cy.fit_random_tree(X, y, u, max_features, depth, 2)
            assert _equal(a, b)
            assert _equal(py.tree_predict(*a, X), cy.tree_predict(*b, X))


def test_best_split_matches_exhaustive_scan(kernels, rng):
    for _ in range(50):
        n = int(rng.integers(2, 30))
        x = np.sort(rng.integers(0, 6, n).astype(float))
        y = rng.normal(size=n)
        w = rng.uniform(0.1, 2.0, n)
        best, best_i = -np.inf, -1
        for i in range(n - 1):
            if x[i] == x[i + 1]:
                continue
            wl, wr = w[:i + 1].sum(), w[i + 1:].sum()
            sl, sr = (w * y)[:i + 1].sum(), (w * y)[i + 1:].sum()
            score = sl * sl / wl + sr * sr / wr
            if score > best + 1e-12:
                best, best_i = score, i
        i, score = kernels.best_split(x, y, w)
        assert i == best_i
        if i >= 0:
            assert score == pytest.approx(best, rel=1e-12)


def test_random_tree_fits_distinct_points_exactly(kernels, rng):
    X = rng.uniform(size=(60, 3))
    y = rng.normal(size=60)
    tree = kernels.fit_random_tree(X, y, rng.random(4 * X.size + 1), 0, -1, 2)
    np.testing.assert_array_equal(kernels.tree_predict(*tree, X), y)
