# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Semantics are defined by ``_kernels_py``."""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, floor, ceil

cnp.import_array()


def local_maxima(x_in):
    cdef const double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    out = np.empty(max(n // 2, 0), dtype=np.int64)
    cdef cnp.int64_t[::1] res = out
    cdef Py_ssize_t i = 1, ahead, m = 0
    while i < n - 1:
        if x[i - 1] < x[i]:
            ahead = i + 1
            while ahead < n - 1 and x[ahead] == x[i]:
                ahead += 1
            if x[ahead] < x[i]:
                res[m] = i
                m += 1
            i = ahead
        else:
            i += 1
    return out[:m].copy()


def peak_prominences(x_in, peaks_in):
    cdef const double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef const cnp.int64_t[::1] peaks = np.ascontiguousarray(peaks_in, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0], k, p, j
    out = np.empty(peaks.shape[0], dtype=np.float64)
    cdef double[::1] res = out
    cdef double h, left_min, right_min
    for k in range(peaks.shape[0]):
        p = peaks[k]
        h = x[p]
        left_min = h
        j = p
        while j >= 0 and x[j] <= h:
            if x[j] < left_min:
                left_min = x[j]
            j -= 1
        right_min = h
        j = p
        while j < n and x[j] <= h:
            if x[j] < right_min:
                right_min = x[j]
            j += 1
        res[k] = h - (left_min if left_min > right_min else right_min)
    return out


def select_by_distance(peaks_in, heights_in, Py_ssize_t distance):
    cdef const cnp.int64_t[::1] peaks = np.ascontiguousarray(peaks_in, dtype=np.int64)
    heights = np.ascontiguousarray(heights_in, dtype=np.float64)
    cdef Py_ssize_t n = peaks.shape[0], k, i, j
    keep_arr = np.ones(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] keep = keep_arr
    if distance <= 1 or n < 2:
        return keep_arr.astype(bool)
    cdef const cnp.int64_t[::1] order = np.lexsort((np.asarray(peaks), -heights)).astype(np.int64)
    for k in range(n):
        i = order[k]
        if not keep[i]:
            continue
        j = i - 1
        while j >= 0 and peaks[i] - peaks[j] < distance:
            keep[j] = 0
            j -= 1
        j = i + 1
        while j < n and peaks[j] - peaks[i] < distance:
            keep[j] = 0
            j += 1
    return keep_arr.astype(bool)


def fill_polygon(xs_in, ys_in, Py_ssize_t width, Py_ssize_t height):
    cdef const double[::1] xs = np.ascontiguousarray(xs_in, dtype=np.float64)
    cdef const double[::1] ys = np.ascontiguousarray(ys_in, dtype=np.float64)
    mask_arr = np.zeros((height, width), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] mask = mask_arr
    cdef Py_ssize_t nv = xs.shape[0]
    if nv < 3:
        return mask_arr
    cross_arr = np.empty(nv, dtype=np.float64)
    cdef double[::1] cross = cross_arr
    cdef double ymin = ys[0], ymax = ys[0], py, px, a0, b0, a1, b1
    cdef Py_ssize_t e, row, col, nc, c, cnt, row_lo, row_hi
    for e in range(nv):
        if ys[e] < ymin:
            ymin = ys[e]
        if ys[e] > ymax:
            ymax = ys[e]
    row_lo = <Py_ssize_t>floor(ymin) - 1
    if row_lo < 0:
        row_lo = 0
    row_hi = <Py_ssize_t>ceil(ymax) + 1
    if row_hi > height:
        row_hi = height
    for row in range(row_lo, row_hi):
        py = row + 0.5
        nc = 0
        for e in range(nv):
            a0 = xs[e]
            b0 = ys[e]
            a1 = xs[(e + 1) % nv]
            b1 = ys[(e + 1) % nv]
            if (b0 > py) != (b1 > py):
                cross[nc] = a0 + (py - b0) * (a1 - a0) / (b1 - b0)
                nc += 1
        if nc == 0:
            continue
        for col in range(width):
            px = col + 0.5
            cnt = 0
            for c in range(nc):
                if cross[c] > px:
                    cnt += 1
            mask[row, col] = cnt & 1
    return mask_arr


def best_split(x_in, y_in, w_in):
    cdef const double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], i, best = -1
    if n < 2:
        return -1, -INFINITY
    cdef double wt = 0.0, st = 0.0, wl = 0.0, sl = 0.0, wr, sr, score, best_score = -INFINITY
    for i in range(n):
        wt += w[i]
        st += w[i] * y[i]
    for i in range(n - 1):
        wl += w[i]
        sl += w[i] * y[i]
        if not x[i] < x[i + 1]:
            continue
        wr = wt - wl
        sr = st - sl
        if not (wl > 0 and wr > 0):
            continue
        score = sl * sl / wl + sr * sr / wr
        if score > best_score:
            best_score = score
            best = i
    return best, best_score


def tree_predict(feature_in, threshold_in, left_in, right_in, value_in, X_in):
    cdef const cnp.int64_t[::1] feature = np.ascontiguousarray(feature_in, dtype=np.int64)
    cdef const double[::1] threshold = np.ascontiguousarray(threshold_in, dtype=np.float64)
    cdef const cnp.int64_t[::1] left = np.ascontiguousarray(left_in, dtype=np.int64)
    cdef const cnp.int64_t[::1] right = np.ascontiguousarray(right_in, dtype=np.int64)
    cdef const double[::1] value = np.ascontiguousarray(value_in, dtype=np.float64)
    cdef const double[:, ::1] X = np.ascontiguousarray(X_in, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t i, node
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        res[i] = value[node]
    return out


def fit_random_tree(X_in, y_in, u_in, Py_ssize_t max_features, Py_ssize_t max_depth,
                    Py_ssize_t min_samples_split):
    cdef const double[:, ::1] X = np.ascontiguousarray(X_in, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0], p = X.shape[1]
    cdef Py_ssize_t k = p if (max_features <= 0 or max_features >= p) else max_features
    cdef Py_ssize_t cap = 2 * n + 1
    feat_a = np.full(cap, -1, dtype=np.int64)
    thr_a = np.zeros(cap, dtype=np.float64)
    left_a = np.full(cap, -1, dtype=np.int64)
    right_a = np.full(cap, -1, dtype=np.int64)
    val_a = np.zeros(cap, dtype=np.float64)
    cdef cnp.int64_t[::1] feature = feat_a
    cdef double[::1] threshold = thr_a
    cdef cnp.int64_t[::1] left = left_a
    cdef cnp.int64_t[::1] right = right_a
    cdef double[::1] value = val_a
    samples_a = np.arange(n, dtype=np.int64)
    tmp_a = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] samples = samples_a
    cdef cnp.int64_t[::1] tmp = tmp_a
    perm_a = np.empty(p, dtype=np.int64)
    feats_a = np.empty(p, dtype=np.int64)
    cdef cnp.int64_t[::1] perm = perm_a
    cdef cnp.int64_t[::1] feats = feats_a
    # explicit DFS stack: node, start, end, depth
    stack_a = np.empty((cap, 4), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] stack = stack_a
    cdef Py_ssize_t top = 0, n_nodes = 1, pos = 0, n_u = u.shape[0]
    cdef Py_ssize_t node, start, end, depth, m, i, j, r, f, fi, nf, nl, best_f, a, b, s
    cdef double total, lo, hi, thr, sl, sr, score, best_score, best_thr, y0, xv
    cdef bint same
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        m = end - start
        total = 0.0
        same = True
        y0 = y[samples[start]]
        for i in range(start, end):
            total += y[samples[i]]
            if y[samples[i]] != y0:
                same = False
        value[node] = total / m
        if (max_depth >= 0 and depth >= max_depth) or m < min_samples_split or same:
            continue
        if k < p:
            for j in range(p):
                perm[j] = j
            for j in range(k):
                if pos >= n_u:
                    raise ValueError("uniform stream exhausted")
                r = j + <Py_ssize_t>(u[pos] * (p - j))
                pos += 1
                s = perm[j]
                perm[j] = perm[r]
                perm[r] = s
            # insertion sort of the k picked features
            for j in range(k):
                feats[j] = perm[j]
            for j in range(1, k):
                s = feats[j]
                i = j - 1
                while i >= 0 and feats[i] > s:
                    feats[i + 1] = feats[i]
                    i -= 1
                feats[i + 1] = s
            nf = k
        else:
            for j in range(p):
                feats[j] = j
            nf = p
        best_score = -INFINITY
        best_f = -1
        best_thr = 0.0
        for fi in range(nf):
            f = feats[fi]
            lo = X[samples[start], f]
            hi = lo
            for i in range(start, end):
                xv = X[samples[i], f]
                if xv < lo:
                    lo = xv
                if xv > hi:
                    hi = xv
            if not lo < hi:
                continue
            if pos >= n_u:
                raise ValueError("uniform stream exhausted")
            thr = lo + u[pos] * (hi - lo)
            pos += 1
            nl = 0
            sl = 0.0
            for i in range(start, end):
                if X[samples[i], f] <= thr:
                    nl += 1
                    sl += y[samples[i]]
            if nl == 0 or nl == m:
                continue
            sr = total - sl
            score = sl * sl / nl + sr * sr / (m - nl)
            if score > best_score:
                best_score = score
                best_f = f
                best_thr = thr
        if best_f < 0:
            continue
        # stable partition of samples[start:end]
        a = 0
        for i in range(start, end):
            if X[samples[i], best_f] <= best_thr:
                tmp[a] = samples[i]
                a += 1
        b = a
        for i in range(start, end):
            if not X[samples[i], best_f] <= best_thr:
                tmp[b] = samples[i]
                b += 1
        for i in range(m):
            samples[start + i] = tmp[i]
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        n_nodes += 2
        stack[top, 0] = right[node]
        stack[top, 1] = start + a
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = left[node]
        stack[top, 1] = start
        stack[top, 2] = start + a
        stack[top, 3] = depth + 1
        top += 1
    return (feat_a[:n_nodes].copy(), thr_a[:n_nodes].copy(), left_a[:n_nodes].copy(),
            right_a[:n_nodes].copy(), val_a[:n_nodes].copy())
