"""Compiled hot loops for the classifiers.

All randomness inside kernels comes from a splitmix64 stream (see popa.rng
for the pure-Python mirror); results are therefore reproducible across
platforms independent of any numpy generator state.

Tree building works on rank codes: each feature's values are mapped once to
dense ranks over its sorted distinct values (`codes_t`, transposed d x n,
with the distinct-value table `vals` indexed through `voff`). Split search
scans a node's instances grouped by code and maintains the left/right sums
of squared class counts incrementally, so each candidate cut costs O(1).
Candidate cuts are compared through g = (SL*nr + SR*nl) / (nl*nr): a single
correctly-rounded division of exact int64 quantities, which makes equal
rational gains compare equal and keeps the documented (lower feature, lower
threshold) tie-break exact. Requires sample sizes below ~1.6e6 so the int64
products cannot overflow.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_INV53 = 1.0 / 9007199254740992.0  # 2^-53
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MASK = U64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True)
def _next_u64(state):
    state[0] = (state[0] + _GOLDEN) & _MASK
    z = state[0]
    z = ((z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)) & _MASK
    z = ((z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)) & _MASK
    return z ^ (z >> U64(31))


@njit(cache=True)
def _rand_below(state, n):
    u = np.float64(_next_u64(state) >> U64(11)) * _INV53
    i = np.int64(u * n)
    if i >= n:
        i = n - 1
    return i


@njit(cache=True)
def rng_probe(seed, k):
    """First k raw draws of the stream; lets tests pin the python mirror."""
    state = np.empty(1, np.uint64)
    state[0] = U64(seed)
    out = np.empty(k, np.uint64)
    for i in range(k):
        out[i] = _next_u64(state)
    return out


@njit(cache=True)
def build_tree(codes_t, vals, voff, y, n_labels, mtry, max_depth, min_leaf, seed, bootstrap):
    """Grow one CART tree; returns flat node arrays plus sparse leaf counts.

    codes_t : (d, n) int32 rank codes per feature
    vals    : float64 distinct-value table, feature f at vals[voff[f]:voff[f+1]]
    y       : (n,) int32 label codes in canonical order
    seed    : stream seed; bootstrap draws (if any) come first, then the
              per-node candidate-feature draws in depth-first order.
    """
    d = codes_t.shape[0]
    n = codes_t.shape[1]

    state = np.empty(1, np.uint64)
    state[0] = U64(seed)

    ids = np.empty(n, np.int32)
    if bootstrap:
        for j in range(n):
            ids[j] = _rand_below(state, n)
    else:
        for j in range(n):
            ids[j] = j

    max_nodes = 2 * n + 1
    feat = np.full(max_nodes, -1, np.int32)
    thr = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int32)
    right = np.full(max_nodes, -1, np.int32)
    leaf_maj = np.full(max_nodes, -1, np.int32)
    cnt_off = np.zeros(max_nodes, np.int64)
    cnt_len = np.zeros(max_nodes, np.int32)
    cnt_lab = np.empty(n + n_labels, np.int32)
    cnt_val = np.empty(n + n_labels, np.int64)
    cnt_pos = 0

    cap = 4 * (max_depth + 2)
    st_node = np.empty(cap, np.int64)
    st_lo = np.empty(cap, np.int64)
    st_hi = np.empty(cap, np.int64)
    st_dep = np.empty(cap, np.int64)

    counts = np.zeros(n_labels, np.int64)
    lcnt = np.zeros(n_labels, np.int64)
    featbuf = np.empty(d, np.int64)
    maxrange = 0
    for f in range(d):
        r = voff[f + 1] - voff[f]
        if r > maxrange:
            maxrange = r
    cnt = np.zeros(maxrange + 1, np.int64)
    gl = np.empty(n, np.int32)
    scode = np.empty(n, np.int32)
    tmpi = np.empty(n, np.int32)

    n_nodes = 1
    st_node[0] = 0
    st_lo[0] = 0
    st_hi[0] = n
    st_dep[0] = 0
    sp = 1

    while sp > 0:
        sp -= 1
        node = st_node[sp]
        lo = st_lo[sp]
        hi = st_hi[sp]
        depth = st_dep[sp]
        m = hi - lo

        for c in range(n_labels):
            counts[c] = 0
        for p in range(lo, hi):
            counts[y[ids[p]]] += 1
        nz = 0
        maj = -1
        bc = np.int64(-1)
        for c in range(n_labels):
            if counts[c] > 0:
                nz += 1
                if counts[c] > bc:
                    bc = counts[c]
                    maj = c

        split_allowed = nz > 1 and depth < max_depth and m >= 2 * min_leaf
        best_f = -1
        best_thr = 0.0

        if split_allowed:
            for j in range(d):
                featbuf[j] = j
            for j in range(mtry):
                r = j + _rand_below(state, d - j)
                t = featbuf[j]
                featbuf[j] = featbuf[r]
                featbuf[r] = t
            for a in range(1, mtry):
                key = featbuf[a]
                b = a - 1
                while b >= 0 and featbuf[b] > key:
                    featbuf[b + 1] = featbuf[b]
                    b -= 1
                featbuf[b + 1] = key

            SALL = np.int64(0)
            for c in range(n_labels):
                SALL += counts[c] * counts[c]

            best_g = -1.0

            for fj in range(mtry):
                f = featbuf[fj]
                Cf = codes_t[f]
                base_v = voff[f]
                nvals = np.int64(voff[f + 1] - base_v)

                if m <= 48:
                    # insertion sort (code, label) pairs for tiny nodes
                    for q in range(m):
                        i = ids[lo + q]
                        ccode = Cf[i]
                        cy = y[i]
                        b = q - 1
                        while b >= 0 and scode[b] > ccode:
                            scode[b + 1] = scode[b]
                            gl[b + 1] = gl[b]
                            b -= 1
                        scode[b + 1] = ccode
                        gl[b + 1] = cy
                    for c in range(n_labels):
                        lcnt[c] = 0
                    SL = np.int64(0)
                    SR = SALL
                    nl = np.int64(0)
                    prev_code = -1
                    for q in range(m):
                        cc = scode[q]
                        if prev_code >= 0 and cc != prev_code:
                            nr = m - nl
                            if nl >= min_leaf and nr >= min_leaf:
                                g = np.float64(SL * nr + SR * nl) / np.float64(nl * nr)
                                if g > best_g:
                                    t_mid = (vals[base_v + prev_code] + vals[base_v + cc]) * 0.5
                                    if t_mid > vals[base_v + prev_code]:
                                        best_g = g
                                        best_f = f
                                        best_thr = t_mid
                        c = gl[q]
                        SL += 2 * lcnt[c] + 1
                        SR -= 2 * (counts[c] - lcnt[c]) - 1
                        lcnt[c] += 1
                        nl += 1
                        prev_code = cc
                    continue

                # counting groups over the feature's full code range
                for r in range(nvals + 1):
                    cnt[r] = 0
                for p in range(lo, hi):
                    cnt[Cf[ids[p]] + 1] += 1
                for r in range(1, nvals + 1):
                    cnt[r] += cnt[r - 1]
                for p in range(lo, hi):
                    i = ids[p]
                    cc = Cf[i]
                    gl[cnt[cc]] = y[i]
                    cnt[cc] += 1
                # cnt[g] is now the end offset of code group g
                for c in range(n_labels):
                    lcnt[c] = 0
                SL = np.int64(0)
                SR = SALL
                nl = np.int64(0)
                prev_code = -1
                gstart = np.int64(0)
                for g_ in range(nvals):
                    gend = cnt[g_]
                    if gend == gstart:
                        continue
                    if prev_code >= 0:
                        nr = m - nl
                        if nl >= min_leaf and nr >= min_leaf:
                            g = np.float64(SL * nr + SR * nl) / np.float64(nl * nr)
                            if g > best_g:
                                t_mid = (vals[base_v + prev_code] + vals[base_v + g_]) * 0.5
                                if t_mid > vals[base_v + prev_code]:
                                    best_g = g
                                    best_f = f
                                    best_thr = t_mid
                    for q in range(gstart, gend):
                        c = gl[q]
                        SL += 2 * lcnt[c] + 1
                        SR -= 2 * (counts[c] - lcnt[c]) - 1
                        lcnt[c] += 1
                    nl += gend - gstart
                    prev_code = g_
                    gstart = gend

        if best_f < 0:
            leaf_maj[node] = maj
            cnt_off[node] = cnt_pos
            nnz = 0
            for c in range(n_labels):
                if counts[c] > 0:
                    cnt_lab[cnt_pos + nnz] = c
                    cnt_val[cnt_pos + nnz] = counts[c]
                    nnz += 1
            cnt_len[node] = nnz
            cnt_pos += nnz
            continue

        Cbf = codes_t[best_f]
        vb = voff[best_f]
        a = lo
        b = 0
        for p in range(lo, hi):
            i = ids[p]
            if vals[vb + Cbf[i]] < best_thr:
                ids[a] = i
                a += 1
            else:
                tmpi[b] = i
                b += 1
        for q in range(b):
            ids[a + q] = tmpi[q]
        mid = a

        feat[node] = best_f
        thr[node] = best_thr
        lc = n_nodes
        rc = n_nodes + 1
        left[node] = lc
        right[node] = rc
        n_nodes += 2
        st_node[sp] = rc
        st_lo[sp] = mid
        st_hi[sp] = hi
        st_dep[sp] = depth + 1
        sp += 1
        st_node[sp] = lc
        st_lo[sp] = lo
        st_hi[sp] = mid
        st_dep[sp] = depth + 1
        sp += 1

    return (
        feat[:n_nodes].copy(),
        thr[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        leaf_maj[:n_nodes].copy(),
        cnt_off[:n_nodes].copy(),
        cnt_len[:n_nodes].copy(),
        cnt_lab[:cnt_pos].copy(),
        cnt_val[:cnt_pos].copy(),
    )


@njit(cache=True)
def forest_votes(feat, thr, left, right, leaf_maj, tree_off, X, n_labels):
    """Per-query leaf-majority votes across all trees -> (nq, L) int32."""
    nq = X.shape[0]
    n_trees = tree_off.shape[0] - 1
    votes = np.zeros((nq, n_labels), np.int32)
    for t in range(n_trees):
        root = tree_off[t]
        for q in range(nq):
            node = root
            while feat[node] >= 0:
                if X[q, feat[node]] < thr[node]:
                    node = left[node]
                else:
                    node = right[node]
            votes[q, leaf_maj[node]] += 1
    return votes


@njit(cache=True)
def knn_votes(Xtr, ytr, Xq, k, n_labels):
    """Exact k-nearest votes: squared euclidean distance computed term by
    term left to right, ties broken by smaller training-instance index."""
    nq = Xq.shape[0]
    n = Xtr.shape[0]
    d = Xtr.shape[1]
    votes = np.zeros((nq, n_labels), np.int32)
    bd = np.empty(k, np.float64)
    bi = np.empty(k, np.int64)
    for q in range(nq):
        for j in range(k):
            bd[j] = np.inf
            bi[j] = -1
        worst = np.inf
        for i in range(n):
            s = 0.0
            ok = True
            for t in range(d):
                diff = Xq[q, t] - Xtr[i, t]
                s += diff * diff
                if s > worst:
                    ok = False
                    break
            if not ok:
                continue
            if s < bd[k - 1] or (s == bd[k - 1] and i < bi[k - 1]):
                j = k - 1
                while j > 0 and (s < bd[j - 1] or (s == bd[j - 1] and i < bi[j - 1])):
                    bd[j] = bd[j - 1]
                    bi[j] = bi[j - 1]
                    j -= 1
                bd[j] = s
                bi[j] = i
                worst = bd[k - 1]
        for j in range(k):
            votes[q, ytr[bi[j]]] += 1
    return votes


@njit(cache=True)
def pegasos_pair(X, ysign, lam, epochs, seed):
    """Hinge-loss linear separator by per-instance subgradient steps.

    Step size 1/(lam * t) with t counting steps across all epochs; instance
    order reshuffled every epoch (Fisher-Yates from the splitmix stream).
    The bias is updated on margin violations only and is not regularized.
    """
    m, d = X.shape
    w = np.zeros(d, np.float64)
    b = 0.0
    state = np.empty(1, np.uint64)
    state[0] = U64(seed)
    order = np.empty(m, np.int64)
    for i in range(m):
        order[i] = i
    t = 0
    for _ in range(epochs):
        for i in range(m - 1, 0, -1):
            j = _rand_below(state, i + 1)
            tmp = order[i]
            order[i] = order[j]
            order[j] = tmp
        for pos in range(m):
            i = order[pos]
            t += 1
            eta = 1.0 / (lam * t)
            margin = b
            for f in range(d):
                margin += w[f] * X[i, f]
            margin *= ysign[i]
            scale = 1.0 - eta * lam
            if margin < 1.0:
                for f in range(d):
                    w[f] = w[f] * scale + eta * ysign[i] * X[i, f]
                b += eta * ysign[i]
            else:
                for f in range(d):
                    w[f] = w[f] * scale
    return w, b
