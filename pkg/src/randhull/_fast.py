"""JIT-compiled fast path for the incremental hull.

Mirrors the exact engine in :mod:`randhull.hull` on flat arrays, committing
only signs certified by the floating filter.  Any uncertain predicate aborts
the whole build and the caller reruns the exact engine, so results are
identical either way: a committed sign equals the exact sign by construction.
"""

from __future__ import annotations

import numpy as np

from .geometry import _SLACK, _U, _err_coeff, _leibniz_tables

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba present in normal installs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore
        def deco(f):
            return f

        return deco


STATUS_OK = 0
STATUS_UNCERTAIN = 1
STATUS_CAPACITY = 2


@njit(cache=True)
def _facet_form(pts, verts, f, perm_cols, perm_signs, err_c, eval_c, slack,
                coef, errv, d, dfact):
    # Maximal minors of [points | 1] give the affine functional coefficients;
    # the permanent of absolute values certifies the rounding error.
    for j in range(d + 1):
        det = 0.0
        perm = 0.0
        for t in range(dfact):
            prod = 1.0
            aprod = 1.0
            for i in range(d):
                c = perm_cols[t, i]
                ca = c if c < j else c + 1
                v = pts[verts[f, i], ca] if ca < d else 1.0
                prod *= v
                aprod *= v if v >= 0.0 else -v
            det += perm_signs[t] * prod
            perm += aprod
        if (d + j) % 2 == 1:
            det = -det
        coef[f, j] = det
        errv[f, j] = perm * err_c
    for j in range(d + 1):
        c = coef[f, j]
        errv[f, j] = (errv[f, j] + eval_c * (c if c >= 0.0 else -c)) * slack


@njit(cache=True)
def _side_raw(pts, coef, errv, f, q, d):
    # +1 beyond, -1 beneath, 0 uncertain (filter refuses to commit).
    s = coef[f, d]
    e = errv[f, d]
    for c in range(d):
        x = pts[q, c]
        s += coef[f, c] * x
        e += errv[f, c] * (x if x >= 0.0 else -x)
    if s > e:
        return 1
    if -s > e:
        return -1
    return 0


@njit(cache=True)
def _kernel(pts, simplex, perm_cols, perm_signs, err_c, eval_c, slack, cap):
    n, d = pts.shape
    dfact = perm_cols.shape[0]

    verts = np.empty((cap, d), np.int64)
    nbrs = np.full((cap, d), -1, np.int64)
    coef = np.empty((cap, d + 1), np.float64)
    errv = np.empty((cap, d + 1), np.float64)
    flip = np.empty(cap, np.int8)
    visit = np.full(cap, -1, np.int64)
    sstamp = np.full(cap, -1, np.int64)
    ssign = np.zeros(cap, np.int8)
    head = np.full(cap, -1, np.int64)
    hz_new = np.empty((cap, d), np.int64)
    alive = np.zeros(cap, np.uint8)

    nxt = np.empty(n, np.int64)
    owner = np.full(n, -1, np.int64)
    in_simplex = np.zeros(n, np.uint8)
    for i in range(d + 1):
        in_simplex[simplex[i]] = 1

    stack = np.empty(cap, np.int64)
    vis = np.empty(cap, np.int64)
    hz_v = np.empty(cap, np.int64)
    hz_i = np.empty(cap, np.int64)
    hz_b = np.empty(cap, np.int64)

    empty_i = np.empty((0, d), np.int64)
    empty_f = np.empty((0, d + 1), np.float64)
    empty_b = np.empty(0, np.int8)

    # ----- initial simplex facets -------------------------------------
    nfac = d + 1
    for l in range(d + 1):
        k = 0
        for i in range(d + 1):
            if i != l:
                verts[l, k] = simplex[i]
                k += 1
        _facet_form(pts, verts, l, perm_cols, perm_signs, err_c, eval_c,
                    slack, coef, errv, d, dfact)
        w = simplex[l]
        s = _side_raw(pts, coef, errv, l, w, d)
        if s == 0:
            return STATUS_UNCERTAIN, 0, empty_i, empty_i, empty_f, empty_f, empty_b
        flip[l] = -s
        if s > 0:
            for j in range(d + 1):
                coef[l, j] = -coef[l, j]
        alive[l] = 1
    for a in range(d + 1):
        for b in range(d + 1):
            if a == b:
                continue
            # slot of simplex[b] within facet a's sorted vertices
            for k in range(d):
                if verts[a, k] == simplex[b]:
                    nbrs[a, k] = b
                    break

    # ----- initial conflict distribution ------------------------------
    for q in range(n):
        if in_simplex[q]:
            continue
        assigned = -1
        all_beneath = True
        for f in range(d + 1):
            s = _side_raw(pts, coef, errv, f, q, d)
            if s > 0:
                assigned = f
                break
            if s == 0:
                all_beneath = False
        if assigned >= 0:
            owner[q] = assigned
            nxt[q] = head[assigned]
            head[assigned] = q
        elif not all_beneath:
            return STATUS_UNCERTAIN, 0, empty_i, empty_i, empty_f, empty_f, empty_b

    # ----- insertions in index order -----------------------------------
    for p in range(n):
        if in_simplex[p] or owner[p] < 0:
            continue
        f0 = owner[p]
        visit[f0] = p
        stack[0] = f0
        vis[0] = f0
        nstack = 1
        nvis = 1
        nhz = 0
        while nstack > 0:
            nstack -= 1
            v = stack[nstack]
            for i in range(d):
                nb = nbrs[v, i]
                if visit[nb] == p:
                    continue
                if sstamp[nb] == p:
                    s = ssign[nb]
                else:
                    s = _side_raw(pts, coef, errv, nb, p, d)
                    sstamp[nb] = p
                    ssign[nb] = s
                if s > 0:
                    visit[nb] = p
                    stack[nstack] = nb
                    nstack += 1
                    vis[nvis] = nb
                    nvis += 1
                elif s < 0:
                    if nhz >= cap:
                        return (STATUS_CAPACITY, 0, empty_i, empty_i,
                                empty_f, empty_f, empty_b)
                    hz_v[nhz] = v
                    hz_i[nhz] = i
                    hz_b[nhz] = nb
                    nhz += 1
                else:
                    return STATUS_UNCERTAIN, 0, empty_i, empty_i, empty_f, empty_f, empty_b
        if nhz == 0:
            return STATUS_UNCERTAIN, 0, empty_i, empty_i, empty_f, empty_f, empty_b
        if nfac + nhz > cap:
            return STATUS_CAPACITY, 0, empty_i, empty_i, empty_f, empty_f, empty_b

        # create new facets over the horizon ridges
        base = nfac
        for t in range(nhz):
            v = hz_v[t]
            i = hz_i[t]
            fnew = base + t
            k = 0
            placed = False
            for j in range(d):
                if j == i:
                    continue
                u = verts[v, j]
                if not placed and p < u:
                    verts[fnew, k] = p
                    k += 1
                    placed = True
                verts[fnew, k] = u
                k += 1
            if not placed:
                verts[fnew, k] = p
            _facet_form(pts, verts, fnew, perm_cols, perm_signs, err_c,
                        eval_c, slack, coef, errv, d, dfact)
            w = verts[v, i]
            s = _side_raw(pts, coef, errv, fnew, w, d)
            if s == 0:
                return STATUS_UNCERTAIN, 0, empty_i, empty_i, empty_f, empty_f, empty_b
            flip[fnew] = -s
            if s > 0:
                for j in range(d + 1):
                    coef[fnew, j] = -coef[fnew, j]
            alive[fnew] = 1
            hz_new[v, i] = fnew
        nfac = base + nhz

        # wire each new facet to the kept facet across its horizon ridge
        for t in range(nhz):
            v = hz_v[t]
            i = hz_i[t]
            b = hz_b[t]
            fnew = base + t
            for k in range(d):
                if verts[fnew, k] == p:
                    nbrs[fnew, k] = b
                    break
            for k in range(d):
                if nbrs[b, k] == v:
                    nbrs[b, k] = fnew
                    break

        # wire new facets to each other by rotating around shared
        # (d-2)-faces of the old hull, crossing the visible region
        for t in range(nhz):
            v = hz_v[t]
            i = hz_i[t]
            fnew = base + t
            w_t = verts[v, i]
            vsum = 0
            for k in range(d):
                vsum += verts[v, k]
            ridge_sum_t = vsum - w_t
            for l in range(d):
                u = verts[fnew, l]
                if u == p or nbrs[fnew, l] >= 0:
                    continue
                q_sum = ridge_sum_t - u
                cur = v
                out_v = u
                cur_sum = vsum
                while True:
                    slot = -1
                    for k in range(d):
                        if verts[cur, k] == out_v:
                            slot = k
                            break
                    nxt_f = nbrs[cur, slot]
                    r_sum = cur_sum - out_v
                    if visit[nxt_f] != p:
                        # crossed the horizon: the matching new facet sits
                        # over ridge (cur, slot)
                        other = hz_new[cur, slot]
                        nbrs[fnew, l] = other
                        e_last = r_sum - q_sum
                        for k in range(d):
                            if verts[other, k] == e_last:
                                nbrs[other, k] = fnew
                                break
                        break
                    nsum = 0
                    for k in range(d):
                        nsum += verts[nxt_f, k]
                    out_v = r_sum - q_sum
                    cur = nxt_f
                    cur_sum = nsum

        # retire visible facets and redistribute their conflict points
        for z in range(nvis):
            alive[vis[z]] = 0
        for z in range(nvis):
            q = head[vis[z]]
            while q >= 0:
                q_next = nxt[q]
                if q != p:
                    assigned = -1
                    all_beneath = True
                    for t in range(nhz):
                        f = base + t
                        s = _side_raw(pts, coef, errv, f, q, d)
                        if s > 0:
                            assigned = f
                            break
                        if s == 0:
                            all_beneath = False
                    if assigned >= 0:
                        owner[q] = assigned
                        nxt[q] = head[assigned]
                        head[assigned] = q
                    elif all_beneath:
                        owner[q] = -1
                    else:
                        return (STATUS_UNCERTAIN, 0, empty_i, empty_i,
                                empty_f, empty_f, empty_b)
                q = q_next

    # ----- compact alive facets ---------------------------------------
    remap = np.full(nfac, -1, np.int64)
    count = 0
    for f in range(nfac):
        if alive[f]:
            remap[f] = count
            count += 1
    out_verts = np.empty((count, d), np.int64)
    out_nbrs = np.empty((count, d), np.int64)
    out_coef = np.empty((count, d + 1), np.float64)
    out_err = np.empty((count, d + 1), np.float64)
    out_flip = np.empty(count, np.int8)
    for f in range(nfac):
        g = remap[f]
        if g < 0:
            continue
        for k in range(d):
            out_verts[g, k] = verts[f, k]
            out_nbrs[g, k] = remap[nbrs[f, k]]
        for j in range(d + 1):
            out_coef[g, j] = coef[f, j]
            out_err[g, j] = errv[f, j]
        out_flip[g] = flip[f]
    return STATUS_OK, count, out_verts, out_nbrs, out_coef, out_err, out_flip


def build_arrays(pts: np.ndarray, simplex: list[int]):
    """Run the fast kernel.  Returns (verts, nbrs, coef, err, flip) arrays or
    None when the exact engine must take over."""
    if not HAVE_NUMBA:
        return None
    n, d = pts.shape
    _, cols, signs = _leibniz_tables(d)
    perm_cols = np.ascontiguousarray(cols, dtype=np.int64)
    perm_signs = np.ascontiguousarray(signs, dtype=np.float64)
    err_c = _err_coeff(d)
    eval_c = (d + 2) * _U
    simplex_arr = np.asarray(simplex, dtype=np.int64)
    cap = 48 * n + 8 * (d + 2) * (d + 2)
    for _ in range(4):
        status, count, verts, nbrs, coef, errv, flip = _kernel(
            pts, simplex_arr, perm_cols, perm_signs, err_c, eval_c, _SLACK, cap)
        if status == STATUS_CAPACITY:
            cap *= 4
            continue
        if status == STATUS_OK:
            return verts, nbrs, coef, errv, flip
        return None
    return None
