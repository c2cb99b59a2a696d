"""Compiled inner loop of the window propagation (see :mod:`geodiam.geodesic`).

Windows are stored in two growable arrays: ``NI[k] = (face, ia, ib, parent,
edge)`` and ``NF[k] = (ax, ay, bx, by, w0x, w0y, w1x, w1y)``. The window
lives on the edge ``ia-ib`` of ``face`` (the face it is about to enter),
``a``/``b`` are the unfolded images of the edge end points and ``w0``/``w1``
bound the visible interval; the source sits at the origin.
"""

import heapq
import math

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_BUDGET = 1


@njit(cache=True)
def _seg_dist(px, py, qx, qy):
    dx, dy = qx - px, qy - py
    dd = dx * dx + dy * dy
    if dd <= 0.0:
        return math.hypot(px, py)
    t = -(px * dx + py * dy) / dd
    if t <= 0.0:
        return math.hypot(px, py)
    if t >= 1.0:
        return math.hypot(qx, qy)
    return math.hypot(px + t * dx, py + t * dy)


@njit(cache=True)
def _grow_i(a):
    b = np.empty((a.shape[0] * 2, a.shape[1]), dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _grow_f(a):
    b = np.empty((a.shape[0] * 2, a.shape[1]), dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _edge_seq(NI, idx):
    depth = 0
    k = idx
    while k >= 0:
        depth += 1
        k = NI[k, 3]
    out = np.empty(depth, dtype=np.int64)
    k = idx
    j = depth - 1
    while k >= 0:
        out[j] = NI[k, 4]
        j -= 1
        k = NI[k, 3]
    return out


@njit(cache=True)
def _seq_less(NI, a, b):
    """Edge sequence of node ``a`` lexicographically before that of ``b``."""
    sa = _edge_seq(NI, a) if a >= 0 else np.empty(0, dtype=np.int64)
    sb = _edge_seq(NI, b) if b >= 0 else np.empty(0, dtype=np.int64)
    n = min(sa.shape[0], sb.shape[0])
    for i in range(n):
        if sa[i] != sb[i]:
            return sa[i] < sb[i]
    return sa.shape[0] < sb.shape[0]


@njit(cache=True)
def _key(V, use_astar, astar, ia, ib, ax, ay, bx, by, w0x, w0y, w1x, w1y):
    key = _seg_dist(w0x, w0y, w1x, w1y)
    if use_astar:
        a0, a1, a2 = V[ia, 0], V[ia, 1], V[ia, 2]
        e0, e1, e2 = V[ib, 0] - a0, V[ib, 1] - a1, V[ib, 2] - a2
        dx, dy = bx - ax, by - ay
        dd = dx * dx + dy * dy
        t0 = ((w0x - ax) * dx + (w0y - ay) * dy) / dd
        t1 = ((w1x - ax) * dx + (w1y - ay) * dy) / dd
        s0 = a0 + t0 * e0 - astar[0]
        s1 = a1 + t0 * e1 - astar[1]
        s2 = a2 + t0 * e2 - astar[2]
        dt = t1 - t0
        f0, f1, f2 = dt * e0, dt * e1, dt * e2
        ff = f0 * f0 + f1 * f1 + f2 * f2
        u = 0.0 if ff <= 0.0 else -(s0 * f0 + s1 * f1 + s2 * f2) / ff
        if u < 0.0:
            u = 0.0
        elif u > 1.0:
            u = 1.0
        r0, r1, r2 = s0 + u * f0, s1 + u * f1, s2 + u * f2
        key += math.sqrt(r0 * r0 + r1 * r1 + r2 * r2)
    return key


@njit(cache=True)
def run_kernel(F, FE, EF, elen, V, init_i, init_f, dist_v,
               tgt_ptr, tgt_id, tgt_bary, best, best_node, best_q,
               astar, use_astar, budget, record, slack, field_bound,
               tie, prune_tol, degenerate, max_edge, bound0):
    """Best-first window propagation; mutates ``dist_v`` and the ``best*`` arrays.

    Returns ``(status, NI, NF, popped, HI, HF, nhits, RI, RF, nrec)``.
    """
    cap = 1024
    while cap < 2 * init_i.shape[0]:
        cap *= 2
    NI = np.empty((cap, 5), dtype=np.int64)
    NF = np.empty((cap, 8), dtype=np.float64)
    n = 0
    heap = [(0.0, np.int64(0))]
    heap.pop()
    HI = np.empty((64, 2), dtype=np.int64)
    HF = np.empty((64, 5), dtype=np.float64)
    nh = 0
    RI = np.empty((1024 if record else 1, 1), dtype=np.int64)
    RF = np.empty((1024 if record else 1, 2), dtype=np.float64)
    nr = 0
    ntgt = best.shape[0]

    for r in range(init_i.shape[0]):
        ax, ay, bx, by = init_f[r, 0], init_f[r, 1], init_f[r, 2], init_f[r, 3]
        ia, ib = init_i[r, 1], init_i[r, 2]
        NI[n, 0] = init_i[r, 0]
        NI[n, 1] = ia
        NI[n, 2] = ib
        NI[n, 3] = -1
        NI[n, 4] = init_i[r, 4]
        for j in range(8):
            NF[n, j] = init_f[r, j]
        key = _key(V, use_astar, astar, ia, ib, ax, ay, bx, by,
                   init_f[r, 4], init_f[r, 5], init_f[r, 6], init_f[r, 7])
        heapq.heappush(heap, (key, np.int64(n)))
        n += 1

    bound = bound0
    tol_cone = 1e-12
    popped = 0
    all_reached = False
    nv = dist_v.shape[0]

    while len(heap) > 0:
        key, idx = heapq.heappop(heap)
        if key > bound:
            break
        popped += 1
        if popped > budget:
            return (STATUS_BUDGET, NI[:n], NF[:n], popped, HI[:nh], HF[:nh], nh, RI[:nr], RF[:nr], nr)
        g = NI[idx, 0]
        ia = NI[idx, 1]
        ib = NI[idx, 2]
        ax, ay, bx, by = NF[idx, 0], NF[idx, 1], NF[idx, 2], NF[idx, 3]
        w0x, w0y, w1x, w1y = NF[idx, 4], NF[idx, 5], NF[idx, 6], NF[idx, 7]
        t0, t1, t2 = F[g, 0], F[g, 1], F[g, 2]
        ic = t0 + t1 + t2 - ia - ib
        # local slots of the three vertices
        la = 0 if t0 == ia else (1 if t1 == ia else 2)
        lb = 0 if t0 == ib else (1 if t1 == ib else 2)
        lc = 3 - la - lb
        dx, dy = bx - ax, by - ay
        lab = math.hypot(dx, dy)
        ux, uy = dx / lab, dy / lab
        side = uy * ax - ux * ay
        if abs(side) <= degenerate:
            continue
        e_ac = FE[g, lb]  # edge a-c is opposite b
        e_cb = FE[g, la]
        lac = elen[e_ac]
        lbc = elen[e_cb]
        x = (lac * lac - lbc * lbc + lab * lab) / (2.0 * lab)
        y = math.sqrt(max(lac * lac - x * x, 0.0))
        if side > 0.0:
            y = -y
        cx = ax + x * ux - y * uy
        cy = ay + x * uy + y * ux

        nc = math.hypot(cx, cy)
        nw0 = math.hypot(w0x, w0y)
        nw1 = math.hypot(w1x, w1y)
        if (w0x * cy - w0y * cx >= -tol_cone * nw0 * nc
                and cx * w1y - cy * w1x >= -tol_cone * nw1 * nc):
            if nc < dist_v[ic]:
                dist_v[ic] = nc

        if record:
            if nr >= RI.shape[0]:
                RI = _grow_i(RI)
                RF = _grow_f(RF)
            RI[nr, 0] = idx
            RF[nr, 0] = cx
            RF[nr, 1] = cy
            nr += 1

        if tgt_ptr[g + 1] > tgt_ptr[g]:
            ix = np.empty(3)
            iy = np.empty(3)
            ix[la], iy[la] = ax, ay
            ix[lb], iy[lb] = bx, by
            ix[lc], iy[lc] = cx, cy
            changed = False
            for q in range(tgt_ptr[g], tgt_ptr[g + 1]):
                tid = tgt_id[q]
                b0, b1, b2 = tgt_bary[q, 0], tgt_bary[q, 1], tgt_bary[q, 2]
                qx = b0 * ix[0] + b1 * ix[1] + b2 * ix[2]
                qy = b0 * iy[0] + b1 * iy[1] + b2 * iy[2]
                nq = math.hypot(qx, qy)
                if not (w0x * qy - w0y * qx >= -tol_cone * nw0 * nq
                        and qx * w1y - qy * w1x >= -tol_cone * nw1 * nq):
                    continue
                if slack > 0.0:
                    if nh >= HI.shape[0]:
                        HI = _grow_i(HI)
                        HF = _grow_f(HF)
                    HI[nh, 0] = tid
                    HI[nh, 1] = idx
                    HF[nh, 0] = nq
                    HF[nh, 1] = qx
                    HF[nh, 2] = qy
                    HF[nh, 3] = cx
                    HF[nh, 4] = cy
                    nh += 1
                cur = best[tid]
                if nq < cur - tie:
                    best[tid] = nq
                    best_node[tid] = idx
                    best_q[tid, 0] = qx
                    best_q[tid, 1] = qy
                    changed = True
                elif nq <= cur + tie:
                    old = best_node[tid]
                    if old != -2 and _seq_less(NI, idx, old):
                        best[tid] = min(cur, nq)
                        best_node[tid] = idx
                        best_q[tid, 0] = qx
                        best_q[tid, 1] = qy
                        changed = True
            if changed and ntgt > 0:
                worst = best[0]
                for q in range(1, ntgt):
                    if best[q] > worst:
                        worst = best[q]
                bound = worst + max(tie, slack)

        if field_bound and not all_reached:
            all_reached = True
            for v in range(nv):
                if dist_v[v] == np.inf:
                    all_reached = False
                    break
        if all_reached:
            mx = 0.0
            for v in range(nv):
                if dist_v[v] > mx:
                    mx = dist_v[v]
            if mx + max_edge < bound:
                bound = mx + max_edge

        for side_k in range(2):
            if side_k == 0:
                px, py, qx, qy, ip, iq, e2 = ax, ay, cx, cy, ia, ic, e_ac
            else:
                px, py, qx, qy, ip, iq, e2 = cx, cy, bx, by, ic, ib, e_cb
            ex, ey = qx - px, qy - py
            lo, hi = 0.0, 1.0
            k0 = w0x * py - w0y * px
            k1 = w0x * ey - w0y * ex
            if k1 > 0.0:
                lo = max(lo, -k0 / k1)
            elif k1 < 0.0:
                hi = min(hi, -k0 / k1)
            elif k0 < 0.0:
                continue
            k0 = px * w1y - py * w1x
            k1 = ex * w1y - ey * w1x
            if k1 > 0.0:
                lo = max(lo, -k0 / k1)
            elif k1 < 0.0:
                hi = min(hi, -k0 / k1)
            elif k0 < 0.0:
                continue
            le = math.hypot(ex, ey)
            if (hi - lo) * le <= degenerate:
                continue
            lx, ly = px + lo * ex, py + lo * ey
            hx, hy = px + hi * ex, py + hi * ey
            if math.hypot(hx, hy) - hi * le > dist_v[ip] + prune_tol:
                continue
            if math.hypot(lx, ly) - (1.0 - lo) * le > dist_v[iq] + prune_tol:
                continue
            if _seg_dist(lx, ly, hx, hy) > bound:
                continue
            g2 = EF[e2, 1] if EF[e2, 0] == g else EF[e2, 0]
            # keep the window oriented counterclockwise
            if lx * hy - ly * hx < 0.0:
                lx, ly, hx, hy = hx, hy, lx, ly
            if n >= NI.shape[0]:
                NI = _grow_i(NI)
                NF = _grow_f(NF)
            NI[n, 0] = g2
            NI[n, 1] = ip
            NI[n, 2] = iq
            NI[n, 3] = idx
            NI[n, 4] = e2
            NF[n, 0] = px
            NF[n, 1] = py
            NF[n, 2] = qx
            NF[n, 3] = qy
            NF[n, 4] = lx
            NF[n, 5] = ly
            NF[n, 6] = hx
            NF[n, 7] = hy
            key2 = _key(V, use_astar, astar, ip, iq, px, py, qx, qy, lx, ly, hx, hy)
            heapq.heappush(heap, (key2, np.int64(n)))
            n += 1
    return (STATUS_OK, NI[:n], NF[:n], popped, HI[:nh], HF[:nh], nh, RI[:nr], RF[:nr], nr)
