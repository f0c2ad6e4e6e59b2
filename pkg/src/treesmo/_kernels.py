"""Compiled inner loops for tree growing and routing.

Randomness never originates here: callers pass a buffer of uniforms drawn
from a numpy Generator, which keeps every stream addressable from Python.
"""

import numpy as np
from numba import njit

LEAF = -1
SPLIT_BEST = 0
SPLIT_RANDOM = 1


@njit(cache=True, nogil=True)
def node_stats(y, idx, start, end):
    n = end - start
    s = 0.0
    same = True
    y0 = y[idx[start]]
    for i in range(start, end):
        s += y[idx[i]]
        same = same and y[idx[i]] == y0
    if same:
        # exact for pure nodes; summation would leave round-off
        return y0, 0.0
    mean = s / n
    ss = 0.0
    for i in range(start, end):
        r = y[idx[i]] - mean
        ss += r * r
    return mean, ss / n


@njit(cache=True, nogil=True)
def split_score(X, y, idx, start, end, dim, threshold, mean):
    """Weighted variance reduction of splitting at ``x[dim] <= threshold``.

    Returns (score, n_left); responses are centered on the node mean
    before accumulation.
    """
    n = end - start
    nl = 0
    sl = 0.0
    s = 0.0
    ss = 0.0
    for i in range(start, end):
        r = y[idx[i]] - mean
        s += r
        ss += r * r
        if X[idx[i], dim] <= threshold:
            nl += 1
            sl += r
    nr = n - nl
    if nl == 0 or nr == 0:
        return -np.inf, nl
    sr = s - sl
    # n * reduction = SSE_parent - SSE_left - SSE_right
    gain = sl * sl / nl + sr * sr / nr - s * s / n
    return gain / n, nl


@njit(cache=True, nogil=True)
def best_split(X, y, idx, start, end, dims, min_samples_leaf):
    """Exhaustive midpoint search; returns (dim, threshold, score) or dim -1."""
    n = end - start
    mean, _ = node_stats(y, idx, start, end)
    best_dim = -1
    best_thr = 0.0
    best_score = -np.inf
    xs = np.empty(n)
    rs = np.empty(n)
    for dj in range(dims.shape[0]):
        dim = dims[dj]
        for i in range(n):
            xs[i] = X[idx[start + i], dim]
        order = np.argsort(xs, kind="mergesort")
        xsorted = xs[order]
        if xsorted[n - 1] <= xsorted[0]:
            continue
        total = 0.0
        for i in range(n):
            rs[i] = y[idx[start + order[i]]] - mean
            total += rs[i]
        sl = 0.0
        for i in range(n - 1):
            sl += rs[i]
            a = xsorted[i]
            b = xsorted[i + 1]
            if b <= a:
                continue
            nl = i + 1
            nr = n - nl
            if nl < min_samples_leaf or nr < min_samples_leaf:
                continue
            sr = total - sl
            score = (sl * sl / nl + sr * sr / nr - total * total / n) / n
            if score > best_score:
                thr = a + 0.5 * (b - a)
                if thr >= b:
                    thr = a
                best_score = score
                best_dim = dim
                best_thr = thr
    return best_dim, best_thr, best_score


@njit(cache=True, nogil=True)
def random_split(X, y, idx, start, end, dims, uniforms, min_samples_leaf):
    """One uniform threshold per candidate dimension, keep the best.

    ``uniforms`` holds one draw per entry of ``dims`` and is consumed
    whether or not a dimension turns out degenerate.
    """
    mean, _ = node_stats(y, idx, start, end)
    best_dim = -1
    best_thr = 0.0
    best_score = -np.inf
    for dj in range(dims.shape[0]):
        dim = dims[dj]
        lo = np.inf
        hi = -np.inf
        for i in range(start, end):
            v = X[idx[i], dim]
            if v < lo:
                lo = v
            if v > hi:
                hi = v
        if not hi > lo:
            continue
        thr = lo + uniforms[dj] * (hi - lo)
        if thr <= lo or thr >= hi:
            thr = lo + 0.5 * (hi - lo)
            if thr >= hi:
                thr = lo
        score, nl = split_score(X, y, idx, start, end, dim, thr, mean)
        if nl < min_samples_leaf or (end - start - nl) < min_samples_leaf:
            continue
        if score > best_score:
            best_score = score
            best_dim = dim
            best_thr = thr
    return best_dim, best_thr, best_score


@njit(cache=True, nogil=True)
def choose_dims(d, k, uniforms, out):
    """Partial Fisher-Yates: k distinct dimensions, returned sorted."""
    perm = np.arange(d)
    for i in range(k):
        j = i + int(uniforms[i] * (d - i))
        if j >= d:
            j = d - 1
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t
    sel = np.sort(perm[:k])
    for i in range(k):
        out[i] = sel[i]


@njit(cache=True, nogil=True)
def grow(X, y, mode, k, min_samples_split, min_samples_leaf, max_depth, uniforms):
    """Depth-first, left-to-right growth of one tree.

    Returns per-node arrays (feature, threshold, left, right, mean,
    variance, count); ``feature == -1`` marks a leaf.
    """
    n, d = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    mean = np.zeros(cap)
    var = np.zeros(cap)
    count = np.zeros(cap, dtype=np.int64)

    idx = np.arange(n)
    # stack of (node, start, end, depth)
    stack = np.empty((cap, 4), dtype=np.int64)
    sp = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    sp = 1
    n_nodes = 1
    upos = 0
    dims = np.empty(k, dtype=np.int64)
    need_choice = k < d

    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        start = stack[sp, 1]
        end = stack[sp, 2]
        depth = stack[sp, 3]
        m, v = node_stats(y, idx, start, end)
        mean[node] = m
        var[node] = v
        count[node] = end - start

        if end - start < min_samples_split or (max_depth >= 0 and depth >= max_depth):
            continue
        pure = True
        y0 = y[idx[start]]
        for i in range(start + 1, end):
            if y[idx[i]] != y0:
                pure = False
                break
        if pure:
            continue

        if need_choice:
            choose_dims(d, k, uniforms[upos:upos + k], dims)
            upos += k
        else:
            for i in range(k):
                dims[i] = i
        if mode == SPLIT_RANDOM:
            dim, thr, _ = random_split(X, y, idx, start, end, dims,
                                       uniforms[upos:upos + k], min_samples_leaf)
            upos += k
        else:
            dim, thr, _ = best_split(X, y, idx, start, end, dims, min_samples_leaf)
        if dim < 0:
            continue

        # in-place partition of idx[start:end]
        lo = start
        hi = end - 1
        while lo <= hi:
            if X[idx[lo], dim] <= thr:
                lo += 1
            else:
                t = idx[lo]
                idx[lo] = idx[hi]
                idx[hi] = t
                hi -= 1
        mid = lo

        feature[node] = dim
        threshold[node] = thr
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        # push right first so the left subtree is expanded first
        stack[sp, 0] = rnode
        stack[sp, 1] = mid
        stack[sp, 2] = end
        stack[sp, 3] = depth + 1
        sp += 1
        stack[sp, 0] = lnode
        stack[sp, 1] = start
        stack[sp, 2] = mid
        stack[sp, 3] = depth + 1
        sp += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(),
            mean[:n_nodes].copy(), var[:n_nodes].copy(), count[:n_nodes].copy())


@njit(cache=True, nogil=True)
def route(feature, threshold, left, right, X):
    out = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@njit(cache=True, nogil=True)
def tree_depth(feature, left, right):
    depth = np.zeros(feature.shape[0], dtype=np.int64)
    out = 0
    # children always have larger indices than their parent
    for i in range(feature.shape[0]):
        if feature[i] != LEAF:
            depth[left[i]] = depth[i] + 1
            depth[right[i]] = depth[i] + 1
            if depth[i] + 1 > out:
                out = depth[i] + 1
    return out


@njit(cache=True, nogil=True)
def forest_moments(feature, threshold, left, mean, var, roots, depths, X):
    """Ensemble mean and total variance for every row of X.

    Node arrays are the concatenation of all trees with child indices
    already offset, in "self-looping" form: a leaf has feature 0,
    threshold +inf and ``left`` pointing at itself, and every right child
    sits at ``left + 1``. Each tree is then walked for exactly
    ``depths[b]`` branch-free steps.
    """
    n = X.shape[0]
    B = roots.shape[0]
    xt = np.ascontiguousarray(X.T)
    node = np.empty(n, dtype=np.int64)
    # leaf means are stored relative to tree 0's, so agreeing trees give
    # an exact mean and an exactly zero spread
    dev = np.empty((B, n))
    ref = np.zeros(n)
    dsum = np.zeros(n)
    sv = np.zeros(n)
    for b in range(B):
        for i in range(n):
            node[i] = roots[b]
        for _ in range(depths[b]):
            for i in range(n):
                nd = node[i]
                node[i] = left[nd] + (xt[feature[nd], i] > threshold[nd])
        for i in range(n):
            m = mean[node[i]]
            if b == 0:
                ref[i] = m
            d = m - ref[i]
            dev[b, i] = d
            dsum[i] += d
            sv[i] += var[node[i]]
    mu = np.empty(n)
    for i in range(n):
        dsum[i] = dsum[i] / B
        mu[i] = ref[i] + dsum[i]
    spread = np.zeros(n)
    for b in range(B):
        for i in range(n):
            r = dev[b, i] - dsum[i]
            spread[i] += r * r
    sigma2 = np.empty(n)
    for i in range(n):
        sigma2[i] = sv[i] / B + spread[i] / B
    return mu, sigma2
