"""Lower convex envelope of a height field on a regular grid (compiled kernel).

A 2.5D quickhull: the lower hull is kept as a triangulation of the index
rectangle and every triangle owns a linked list of the nodes in its
projection lying strictly below its plane. The deepest node of a list is
inserted by deleting every triangle whose plane passes above it and fanning
the new vertex to the horizon; the dead triangles' nodes are handed to the
fan triangle containing them or dropped once they are on or above it.
Grid coordinates are integers, so orientation tests are exact and only
plane heights are floating point.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _orient(ai, aj, bi, bj, ci, cj):
    return (bi - ai) * (cj - aj) - (bj - aj) * (ci - ai)


@njit(cache=True)
def _set_plane(t, tv, PA, PB, PC, Fl, VI, VJ):
    a, b, c = tv[t, 0], tv[t, 1], tv[t, 2]
    x0, y0, z0 = VI[a], VJ[a], Fl[a]
    x1, y1, z1 = VI[b], VJ[b], Fl[b]
    x2, y2, z2 = VI[c], VJ[c], Fl[c]
    det = float((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
    A = ((z1 - z0) * (y2 - y0) - (z2 - z0) * (y1 - y0)) / det
    B = ((x1 - x0) * (z2 - z0) - (x2 - x0) * (z1 - z0)) / det
    PA[t] = A
    PB[t] = B
    PC[t] = z0 - A * x0 - B * y0


@njit(cache=True)
def _inside(tv, t, VI, VJ, qi, qj):
    a, b, c = tv[t, 0], tv[t, 1], tv[t, 2]
    ai, aj, bi, bj, ci, cj = VI[a], VJ[a], VI[b], VJ[b], VI[c], VJ[c]
    return (
        _orient(ai, aj, bi, bj, qi, qj) >= 0
        and _orient(bi, bj, ci, cj, qi, qj) >= 0
        and _orient(ci, cj, ai, aj, qi, qj) >= 0
    )


@njit(cache=True)
def _span(ai, aj, bi, bj, i, lo, hi):
    """Narrow ``[lo, hi]`` to the j with ``orient(a, b, (i, j)) >= 0`` (exact integers)."""
    di = bi - ai
    rhs = (bj - aj) * (i - ai) + di * aj
    if di > 0:
        v = -((-rhs) // di)
        if v > lo:
            lo = v
    elif di < 0:
        v = (-rhs) // (-di)
        if v < hi:
            hi = v
    elif (bj - aj) * (i - ai) > 0:
        # vertical edge: the sign does not depend on j
        hi = lo - 1
    return lo, hi


@njit(cache=True)
def _row(tv, t, VI, VJ, i):
    a, b, c = tv[t, 0], tv[t, 1], tv[t, 2]
    ai, aj, bi, bj, ci, cj = VI[a], VJ[a], VI[b], VJ[b], VI[c], VJ[c]
    lo, hi = min(aj, bj, cj), max(aj, bj, cj)
    lo, hi = _span(ai, aj, bi, bj, i, lo, hi)
    lo, hi = _span(bi, bj, ci, cj, i, lo, hi)
    lo, hi = _span(ci, cj, ai, aj, i, lo, hi)
    return lo, hi


@njit(cache=True, nogil=True)
def lower_envelope_grid(F):
    """Return ``(envelope, ok)``; ``ok`` is False if a degeneracy forced a bail-out."""
    n, m = F.shape
    N = n * m
    Fl = F.ravel().copy()
    scale = 1.0
    for k in range(N):
        if abs(Fl[k]) > scale:
            scale = abs(Fl[k])
    eps = 1e-12 * scale
    VI = np.empty(N, np.int64)
    VJ = np.empty(N, np.int64)
    for k in range(N):
        VI[k] = k // m
        VJ[k] = k % m
    # live triangles never exceed 2N and a fan adds at most N before the dead are freed
    cap = 3 * N + 64
    tv = np.empty((cap, 3), np.int64)
    tn = np.empty((cap, 3), np.int64)
    alive = np.zeros(cap, np.bool_)
    PA = np.empty(cap)
    PB = np.empty(cap)
    PC = np.empty(cap)
    head = np.full(cap, -1, np.int64)
    nxt = np.empty(N, np.int64)
    vis = np.zeros(cap, np.int64)
    seen = np.zeros(cap, np.int64)
    free = np.empty(cap, np.int64)
    nfree = 0
    startmap = np.full(N, -1, np.int64)
    endmap = np.full(N, -1, np.int64)
    stack = np.empty(cap, np.int64)
    bfs = np.empty(cap, np.int64)
    newt = np.empty(N + 4, np.int64)

    c00, c10, c11, c01 = 0, (n - 1) * m, (n - 1) * m + m - 1, m - 1
    tv[0, 0], tv[0, 1], tv[0, 2] = c00, c10, c11
    tv[1, 0], tv[1, 1], tv[1, 2] = c00, c11, c01
    tn[0, 0], tn[0, 1], tn[0, 2] = -1, 1, -1
    tn[1, 0], tn[1, 1], tn[1, 2] = -1, -1, 0
    _set_plane(0, tv, PA, PB, PC, Fl, VI, VJ)
    if PB[0] * (m - 1) + PC[0] > Fl[c01]:
        # the other diagonal gives the convex starting surface
        tv[0, 0], tv[0, 1], tv[0, 2] = c10, c01, c00
        tv[1, 0], tv[1, 1], tv[1, 2] = c10, c11, c01
        tn[0, 0], tn[0, 1], tn[0, 2] = -1, -1, 1
        tn[1, 0], tn[1, 1], tn[1, 2] = -1, 0, -1
        _set_plane(0, tv, PA, PB, PC, Fl, VI, VJ)
    _set_plane(1, tv, PA, PB, PC, Fl, VI, VJ)
    alive[0] = alive[1] = True
    nt = 2

    # a node on or above the chord of its row or column neighbours is never a hull vertex
    for i in range(n):
        for j in range(m):
            k = i * m + j
            f = Fl[k]
            if 0 < i < n - 1 and f >= 0.5 * (Fl[k - m] + Fl[k + m]) - eps:
                continue
            if 0 < j < m - 1 and f >= 0.5 * (Fl[k - 1] + Fl[k + 1]) - eps:
                continue
            t = 0 if _inside(tv, 0, VI, VJ, i, j) else 1
            if PA[t] * i + PB[t] * j + PC[t] - f > eps:
                nxt[k] = head[t]
                head[t] = k

    stack[0] = 0
    stack[1] = 1
    sp = 2
    stamp = 0
    ok = True
    while sp > 0:
        sp -= 1
        t = stack[sp]
        if not alive[t] or head[t] < 0:
            continue
        p = -1
        best = -1.0
        k = head[t]
        while k >= 0:
            d = PA[t] * VI[k] + PB[t] * VJ[k] + PC[t] - Fl[k]
            if d > best:
                best = d
                p = k
            k = nxt[k]
        pi, pj, pz = VI[p], VJ[p], Fl[p]
        # visible region by BFS from t
        stamp += 1
        nb = 1
        bfs[0] = t
        vis[t] = stamp
        seen[t] = stamp
        q = 0
        while q < nb:
            s = bfs[q]
            q += 1
            for e in range(3):
                u = tn[s, e]
                if u < 0 or seen[u] == stamp:
                    continue
                seen[u] = stamp
                if PA[u] * pi + PB[u] * pj + PC[u] - pz > eps:
                    vis[u] = stamp
                    bfs[nb] = u
                    nb += 1
        # fan p to the horizon
        nn = 0
        bad = False
        for q in range(nb):
            s = bfs[q]
            for e in range(3):
                u = tn[s, e]
                if u >= 0 and vis[u] == stamp:
                    continue
                x = tv[s, (e + 1) % 3]
                y = tv[s, (e + 2) % 3]
                o = _orient(VI[x], VJ[x], VI[y], VJ[y], pi, pj)
                if o <= 0:
                    if o == 0 and u < 0:
                        continue
                    bad = True
                    break
                if nfree > 0:
                    nfree -= 1
                    r = free[nfree]
                else:
                    r = nt
                    nt += 1
                    if nt >= cap:
                        bad = True
                        break
                if startmap[x] >= 0 or endmap[y] >= 0:
                    bad = True
                    break
                tv[r, 0], tv[r, 1], tv[r, 2] = p, x, y
                tn[r, 0], tn[r, 1], tn[r, 2] = u, -1, -1
                head[r] = -1
                if u >= 0:
                    for kk in range(3):
                        if tn[u, kk] == s:
                            tn[u, kk] = r
                startmap[x] = r
                endmap[y] = r
                newt[nn] = r
                nn += 1
            if bad:
                break
        if bad:
            ok = False
            break
        for q in range(nn):
            r = newt[q]
            tn[r, 1] = startmap[tv[r, 2]]
            tn[r, 2] = endmap[tv[r, 1]]
            _set_plane(r, tv, PA, PB, PC, Fl, VI, VJ)
        for q in range(nn):
            r = newt[q]
            startmap[tv[r, 1]] = -1
            endmap[tv[r, 2]] = -1
        # hand the dead triangles' conflict nodes to the fan
        for q in range(nb):
            s = bfs[q]
            k = head[s]
            while k >= 0:
                kn = nxt[k]
                if k != p:
                    ki, kj = VI[k], VJ[k]
                    for w in range(nn):
                        r = newt[w]
                        if _inside(tv, r, VI, VJ, ki, kj):
                            if PA[r] * ki + PB[r] * kj + PC[r] - Fl[k] > eps:
                                nxt[k] = head[r]
                                head[r] = k
                            break
                k = kn
            head[s] = -1
            alive[s] = False
            free[nfree] = s
            nfree += 1
        for q in range(nn):
            r = newt[q]
            alive[r] = True
            if head[r] >= 0:
                if sp >= cap:
                    ok = False
                    break
                stack[sp] = r
                sp += 1
        if not ok:
            break

    out = np.full(N, -np.inf)
    if ok:
        for t in range(nt):
            if not alive[t]:
                continue
            a, b, c = tv[t, 0], tv[t, 1], tv[t, 2]
            for i in range(min(VI[a], VI[b], VI[c]), max(VI[a], VI[b], VI[c]) + 1):
                lo, hi = _row(tv, t, VI, VJ, i)
                for j in range(lo, hi + 1):
                    v = PA[t] * i + PB[t] * j + PC[t]
                    if v > out[i * m + j]:
                        out[i * m + j] = v
        for k in range(N):
            if out[k] > Fl[k] or out[k] == -np.inf:
                out[k] = Fl[k]
    return out.reshape(n, m), ok
