"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` operation for operation so both backends
produce bit-identical results; the compiled module is preferred at import
time by :mod:`lvef._core`.
"""
import numpy as np


def local_maxima(x):
    """Indices of strict local maxima; a plateau is reported by its first index.

    The first and last samples are never maxima, and neither is a plateau
    touching either end of the series.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n < 3:
        return np.empty(0, dtype=np.int64)
    starts = np.flatnonzero(np.r_[True, x[1:] != x[:-1]])
    vals = x[starts]
    if vals.shape[0] < 3:
        return np.empty(0, dtype=np.int64)
    inner = (vals[1:-1] > vals[:-2]) & (vals[1:-1] > vals[2:])
    return starts[1:-1][inner].astype(np.int64)


def peak_prominences(x, peaks):
    x = np.asarray(x, dtype=np.float64)
    peaks = np.asarray(peaks, dtype=np.int64)
    out = np.empty(peaks.shape[0], dtype=np.float64)
    for k, p in enumerate(peaks):
        h = x[p]
        higher = np.flatnonzero(x[:p] > h)
        lo = higher[-1] + 1 if higher.size else 0
        left_min = x[lo:p + 1].min()
        higher = np.flatnonzero(x[p + 1:] > h)
        hi = p + 1 + higher[0] if higher.size else x.shape[0]
        right_min = x[p:hi].min()
        out[k] = h - max(left_min, right_min)
    return out


def select_by_distance(peaks, heights, distance):
    """Boolean keep-mask after greedy thinning.

    Peaks are visited highest first (ties: earliest index first); each kept
    peak suppresses every other peak closer than ``distance`` frames.
    """
    peaks = np.asarray(peaks, dtype=np.int64)
    heights = np.asarray(heights, dtype=np.float64)
    n = peaks.shape[0]
    keep = np.ones(n, dtype=bool)
    if distance <= 1 or n < 2:
        return keep
    order = np.lexsort((peaks, -heights))
    for i in order:
        if not keep[i]:
            continue
        j = i - 1
        while j >= 0 and peaks[i] - peaks[j] < distance:
            keep[j] = False
            j -= 1
        j = i + 1
        while j < n and peaks[j] - peaks[i] < distance:
            keep[j] = False
            j += 1
    return keep


def fill_polygon(xs, ys, width, height):
    """Even-odd scanline fill sampled at pixel centres (x + 0.5, y + 0.5).

    An edge crosses scanline ``py`` when ``min(y0, y1) <= py < max(y0, y1)``;
    a pixel is inside when an odd number of crossings lie strictly to its right.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    mask = np.zeros((height, width), dtype=np.uint8)
    nv = xs.shape[0]
    if nv < 3:
        return mask
    x0, y0 = xs, ys
    x1, y1 = np.roll(xs, -1), np.roll(ys, -1)
    px = np.arange(width, dtype=np.float64) + 0.5
    row_lo = max(int(np.floor(ys.min())) - 1, 0)
    row_hi = min(int(np.ceil(ys.max())) + 1, height)
    for row in range(row_lo, row_hi):
        py = row + 0.5
        hit = (y0 > py) != (y1 > py)
        if not hit.any():
            continue
        a0, b0, a1, b1 = x0[hit], y0[hit], x1[hit], y1[hit]
        cx = np.sort(a0 + (py - b0) * (a1 - a0) / (b1 - b0))
        n_right = cx.shape[0] - np.searchsorted(cx, px, side="right")
        mask[row] = n_right & 1
    return mask


def best_split(x, y, w):
    """Best weighted least-squares cut of samples already sorted by ``x``.

    Returns ``(i, score)`` where the cut falls between positions ``i`` and
    ``i + 1`` and ``score = S_L^2 / W_L + S_R^2 / W_R`` (larger is better).
    Cuts between equal ``x`` values are not allowed; ``i == -1`` when no cut
    exists. Ties go to the first position.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = x.shape[0]
    if n < 2:
        return -1, -np.inf
    cw = np.cumsum(w)
    cs = np.cumsum(w * y)
    wt = cw[n - 1]
    st = cs[n - 1]
    wl = cw[:-1]
    sl = cs[:-1]
    wr = wt - wl
    sr = st - sl
    valid = (x[:-1] < x[1:]) & (wl > 0) & (wr > 0)
    if not valid.any():
        return -1, -np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        score = sl * sl / wl + sr * sr / wr
    score = np.where(valid, score, -np.inf)
    i = int(np.argmax(score))
    return i, float(score[i])


def tree_predict(feature, threshold, left, right, value, X):
    feature = np.asarray(feature, dtype=np.int64)
    threshold = np.asarray(threshold, dtype=np.float64)
    left = np.asarray(left, dtype=np.int64)
    right = np.asarray(right, dtype=np.int64)
    value = np.asarray(value, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = feature[node] >= 0
    rows = np.arange(X.shape[0])
    while active.any():
        idx = rows[active]
        cur = node[idx]
        go_left = X[idx, feature[cur]] <= threshold[cur]
        node[idx] = np.where(go_left, left[cur], right[cur])
        active[idx] = feature[node[idx]] >= 0
    return value[node]


def _seqsum(a):
    # left-to-right accumulation; np.sum's pairwise order would differ from the compiled kernel
    return float(np.add.accumulate(a)[-1]) if a.size else 0.0


def fit_random_tree(X, y, u, max_features, max_depth, min_samples_split):
    """Grow one extremely randomized regression tree.

    Randomness is read sequentially from the uniform stream ``u``: per split
    node, ``k`` draws for a partial Fisher-Yates feature pick (only when
    ``max_features < p``), then one draw per candidate feature with
    ``min < max``, giving ``threshold = min + u * (max - min)``. Nodes are
    expanded depth-first, left child first; ``max_depth < 0`` means unbounded.
    Returns ``(feature, threshold, left, right, value)`` node arrays.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    n, p = X.shape
    k = p if max_features <= 0 or max_features >= p else max_features
    feature, threshold, left, right, value = [-1], [0.0], [-1], [-1], [0.0]
    pos = 0
    stack = [(0, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yi = y[idx]
        total = _seqsum(yi)
        m = idx.size
        value[node] = total / m
        if (0 <= max_depth <= depth) or m < min_samples_split or np.all(yi == yi[0]):
            continue
        if k < p:
            perm = list(range(p))
            for j in range(k):
                r = j + int(u[pos] * (p - j))
                pos += 1
                perm[j], perm[r] = perm[r], perm[j]
            feats = sorted(perm[:k])
        else:
            feats = range(p)
        best_score, best_f, best_thr, best_left = -np.inf, -1, 0.0, None
        for f in feats:
            xf = X[idx, f]
            lo, hi = xf.min(), xf.max()
            if not lo < hi:
                continue
            thr = lo + u[pos] * (hi - lo)
            pos += 1
            go_left = xf <= thr
            nl = int(go_left.sum())
            if nl == 0 or nl == m:
                continue
            sl = _seqsum(yi[go_left])
            sr = total - sl
            score = sl * sl / nl + sr * sr / (m - nl)
            if score > best_score:
                best_score, best_f, best_thr, best_left = score, f, thr, go_left
        if best_f < 0:
            continue
        feature[node], threshold[node] = best_f, best_thr
        lnode = len(feature)
        rnode = lnode + 1
        for _ in range(2):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
        left[node], right[node] = lnode, rnode
        stack.append((rnode, idx[~best_left], depth + 1))
        stack.append((lnode, idx[best_left], depth + 1))
    return (np.asarray(feature, dtype=np.int64), np.asarray(threshold, dtype=np.float64),
            np.asarray(left, dtype=np.int64), np.asarray(right, dtype=np.int64),
            np.asarray(value, dtype=np.float64))
