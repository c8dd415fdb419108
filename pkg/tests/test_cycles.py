import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lvef.cycles import AreaSeries, CardiacCycle, PeakParams, detect_cycles, find_peaks, require_cycles
from lvef.errors import NoCycles


# --- brute-force oracle ------------------------------------------------------------

def oracle_local_maxima(x):
    out = []
    n = len(x)
    for i in range(1, n - 1):
        if not x[i - 1] < x[i]:
            continue
        j = i
        while j + 1 < n and x[j + 1] == x[i]:
            j += 1
        if j + 1 < n and x[j + 1] < x[i]:
            out.append(i)
    return out


def oracle_prominence(x, p):
    h = x[p]
    left = [x[j] for j in range(p, -1, -1)]
    right = [x[j] for j in range(p, len(x))]

    def base(side):
        lowest = h
        for v in side:
            if v > h:
                break
            lowest = min(lowest, v)
        return lowest

    return h - max(base(left), base(right))


def oracle_greedy(x, cands, distance):
    accepted = []
    for p in sorted(cands, key=lambda i: (-x[i], i)):
        if all(abs(p - q) >= distance for q in accepted):
            accepted.append(p)
    return sorted(accepted)


def oracle_find_peaks(x, params):
    x = list(map(float, x))
    thr = params.prominence_fraction * (max(x) - min(x))
    cands = [p for p in oracle_local_maxima(x) if oracle_prominence(x, p) >= thr]
    return oracle_greedy(x, cands, params.min_distance)


def _random_series(rng):
    n = int(rng.integers(1, 201))
    kind = rng.integers(3)
    if kind == 0:
        return rng.integers(0, 5, n).astype(float)  # many ties and plateaus
    if kind == 1:
        return np.round(np.cumsum(rng.normal(size=n)), 1)
    t = np.arange(n)
    return 100 + 30 * np.sin(2 * np.pi * t / rng.uniform(10, 60)) + rng.normal(0, 5, n)


def test_find_peaks_matches_oracle_on_1000_series():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    for _ in range(1000):
        x = _random_series(rng)
        params = PeakParams(min_distance=int(rng.integers(1, 30)),
                            prominence_fraction=float(rng.choice([0.1, 0.3, 0.5, 0.8])))
        assert find_peaks(x, params) == oracle_find_peaks(x, params)
    assert time.perf_counter() - start < 10


def test_greedy_is_lexicographically_best_feasible_subset():
    """Exhaustive check over all feasible subsets on small inputs."""
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(3, 25))
        x = rng.integers(0, 6, n).astype(float)
        cands = oracle_local_maxima(list(x))
        d = int(rng.integers(1, 8))
        key = lambda subset: sorted(((-x[i], i) for i in subset))  # noqa: E731
        best = None
        for r in range(len(cands) + 1):
            for subset in itertools.combinations(cands, r):
                if any(b - a < d for a, b in zip(subset, subset[1:])):
                    continue
                # maximal subsets only; among those, lexicographically best by (height desc, index asc)
                if any(all(abs(c - s) >= d for s in subset) for c in cands if c not in subset):
                    continue
                if best is None or key(subset) < key(best):
                    best = subset
        assert oracle_greedy(x, cands, d) == sorted(best)


def test_constant_series_has_no_peaks():
    assert find_peaks(np.full(50, 7.0)) == []


def test_single_triangular_peak():
    x = np.array([0, 1, 2, 3, 4, 5, 4, 3, 2, 1, 0], dtype=float)
    assert find_peaks(x) == [5]


def test_close_peaks_keep_higher():
    x = np.zeros(40)
    x[10], x[20] = 8.0, 10.0
    assert find_peaks(x, PeakParams(min_distance=20)) == [20]


def test_plateau_reports_first_index():
    x = np.array([0, 1, 3, 3, 3, 1, 0], dtype=float)
    assert find_peaks(x, PeakParams(min_distance=1)) == [2]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=120), st.integers(-1000, 1000), st.integers(1, 25))
def test_peak_properties(values, offset, distance):
    x = np.array(values, dtype=float)
    params = PeakParams(min_distance=distance)
    peaks = find_peaks(x, params)
    assert find_peaks(x + offset, params) == peaks
    assert all(b - a >= distance for a, b in zip(peaks, peaks[1:]))
    thr = params.prominence_fraction * (x.max() - x.min())
    assert all(oracle_prominence(list(x), p) >= thr for p in peaks)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=150), st.integers(1, 25))
def test_cycle_properties(values, distance):
    x = np.array(values, dtype=float)
    cycles = detect_cycles(x, PeakParams(min_distance=distance))
    for c in cycles:
        assert c.ed_frame < c.es_frame
        assert x[c.ed_frame] > x[c.es_frame]
    for a, b in zip(cycles, cycles[1:]):
        assert a.es_frame < b.ed_frame


def test_sinusoid_three_periods():
    t = np.arange(130)
    # maxima at t = 10, 50, 90; minima 20 frames later
    x = 1000 + 200 * np.cos(2 * np.pi * (t - 10) / 40)
    cycles = require_cycles(AreaSeries("s", x))
    assert cycles == [CardiacCycle(10, 30), CardiacCycle(50, 70), CardiacCycle(90, 110)]


def test_regular_rhythm_has_equal_gaps():
    from lvef.synthetic import scale_waveform

    x = 1000 * scale_waveform([40, 55, 62, 48], period=45, hold=4) ** 2
    cycles = detect_cycles(x)
    gaps = {c.es_frame - c.ed_frame for c in cycles}
    assert len(cycles) >= 3 and len(gaps) == 1


def test_irregular_rhythm_gaps_vary():
    from lvef.synthetic import scale_waveform

    s = scale_waveform([50, 50, 50], period=[36, 50, 64], hold=4)
    cycles = detect_cycles(1000 * s ** 2)
    assert len(cycles) == 3
    assert len({c.es_frame - c.ed_frame for c in cycles}) == 3


def test_monotone_series_has_no_cycles():
    with pytest.raises(NoCycles):
        require_cycles(AreaSeries("m", np.arange(100, 0, -1, dtype=float)))
    assert detect_cycles(np.arange(100, 0, -1, dtype=float)) == []


def test_invalid_series_rejected():
    with pytest.raises(ValueError):
        AreaSeries("x", [])
    with pytest.raises(ValueError):
        AreaSeries("x", [1.0, np.nan])
    with pytest.raises(ValueError):
        PeakParams(min_distance=0)
