"""Exact geodesic distances on convex triangulated surfaces.

Shortest paths are found by propagating *windows*: for each edge sequence
reachable from the source, the unfolded strip of faces is laid out in the
source's plane and the set of straight rays from the source through every
edge of the sequence is kept as an interval on the last edge. A window is
expanded across the next face into at most two children.

On a convex surface a shortest path never passes through a vertex, so no
pseudo-sources are needed. Children are discarded when every point of their
interval is reached more cheaply by going to a vertex first (the vertex
distances used are lengths of real paths found so far, so this never
discards a shortest path). The queue is ordered by the distance from the
source to the window (plus a straight-line bound to the target for single
queries), which gives the usual branch-and-bound termination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from ._kernel import STATUS_BUDGET, run_kernel
from .config import node_budget
from .errors import BudgetExceeded, InvalidArgument, NotConvex
from .surface import SurfacePoint, TriSurface

_hypot = math.hypot
_sqrt = math.sqrt


@dataclass
class GeodesicPath:
    """A shortest curve given as surface points; interior points lie on edges."""

    points: list
    length: float
    edges: list
    surface: TriSurface = field(repr=False, compare=False, default=None)

    @property
    def source(self):
        return self.points[0]

    @property
    def target(self):
        return self.points[-1]

    def embedded(self):
        return np.array([self.surface.embed(p) for p in self.points])

    def polyline_length(self):
        pts = self.embedded()
        return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum()) if len(pts) > 1 else 0.0

    def arclengths(self):
        pts = self.embedded()
        if len(pts) < 2:
            return np.zeros(len(pts))
        return np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])

    def to_dict(self):
        return {"length": self.length,
                "points": self.embedded().tolist(),
                "edges": [int(e) for e in self.edges]}

    def obj_text(self):
        pts = self.embedded()
        lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in pts.tolist()]
        if len(pts) > 1:
            lines.append("l " + " ".join(str(i + 1) for i in range(len(pts))))
        return "\n".join(lines) + "\n"


class _Mesh:
    """Plain-Python mirror of the surface arrays used in the inner loop."""

    def __init__(self, s: TriSurface):
        if not s.convex:
            raise NotConvex("exact geodesics need a convex surface")
        curv = s.vertex_curvature()
        if (curv < -1e-9).any():
            raise NotConvex("surface has saddle vertices")
        self.s = s
        self.V = [tuple(v) for v in s.vertices.tolist()]
        self.F = [tuple(f) for f in s.faces.tolist()]
        self.FE = [tuple(e) for e in s.face_edges.tolist()]
        self.EF = [tuple(fs) for fs in s.edge_faces]
        self.EV = [tuple(e) for e in s.edges.tolist()]
        self.edge_of = s.edge_index
        v = s.vertices
        self.elen = np.linalg.norm(v[s.edges[:, 0]] - v[s.edges[:, 1]], axis=1).tolist()
        self.charts = s.charts.tolist()
        self.scale = s.bbox_diag
        self.max_edge = max(self.elen)
        self.F_arr = np.ascontiguousarray(s.faces, dtype=np.int64)
        self.FE_arr = np.ascontiguousarray(s.face_edges, dtype=np.int64)
        self.EF_arr = np.array(s.edge_faces, dtype=np.int64).reshape(-1, 2)
        self.elen_arr = np.array(self.elen, dtype=np.float64)
        self.V_arr = np.ascontiguousarray(s.vertices, dtype=np.float64)


def _mesh(s: TriSurface) -> _Mesh:
    return s.cached("mesh", lambda: _Mesh(s))


def _seg_dist(px, py, qx, qy):
    """Distance from the origin to the segment p-q."""
    dx, dy = qx - px, qy - py
    dd = dx * dx + dy * dy
    if dd <= 0.0:
        return _hypot(px, py)
    t = -(px * dx + py * dy) / dd
    if t <= 0.0:
        return _hypot(px, py)
    if t >= 1.0:
        return _hypot(qx, qy)
    return _hypot(px + t * dx, py + t * dy)


def _seg_dist3(p, a, b):
    ax, ay, az = a
    dx, dy, dz = b[0] - ax, b[1] - ay, b[2] - az
    wx, wy, wz = p[0] - ax, p[1] - ay, p[2] - az
    dd = dx * dx + dy * dy + dz * dz
    t = 0.0 if dd <= 0.0 else max(0.0, min(1.0, (wx * dx + wy * dy + wz * dz) / dd))
    ex, ey, ez = wx - t * dx, wy - t * dy, wz - t * dz
    return _sqrt(ex * ex + ey * ey + ez * ez)


class _Propagation:
    """One single-source window propagation.

    ``targets`` maps target id -> list of (face, bary-in-face). With
    ``astar`` set (3D point of a single target) the queue key includes the
    chord distance from each window to the target. The loop itself runs in
    :func:`geodiam._kernel.run_kernel`.
    """

    def __init__(self, s: TriSurface, source: SurfacePoint, targets=None, astar=None,
                 budget=None, record=False, slack=0.0):
        self.s = s
        self.slack = slack
        self.m = _mesh(s)
        self.source = source
        self.budget = node_budget() if budget is None else budget
        self.record = record
        self.targets = targets or {}
        self.tids = sorted(self.targets)
        self.astar = astar
        self.tie = 1e-12 * self.m.scale
        self.prune_tol = 1e-12 * self.m.scale
        self.direct = {}
        self.direct_hits = []
        self.popped = 0
        nt = len(self.tids)
        self._best = np.full(nt, math.inf)
        self._best_node = np.full(nt, -2, dtype=np.int64)
        self._best_q = np.zeros((nt, 2))
        self.dist_v = np.full(len(self.m.V), math.inf)

    # -- results as dictionaries keyed by target id -----------------------------
    @property
    def best(self):
        return {tid: float(self._best[k]) for k, tid in enumerate(self.tids)}

    def _offer_direct(self, k, length, qx, qy):
        # direct hits inside a source face have the empty edge sequence
        if length < self._best[k] - self.tie or (
                length <= self._best[k] + self.tie and self._best_node[k] != -1):
            self._best[k] = min(length, self._best[k])
            self._best_node[k] = -1
            self._best_q[k] = (qx, qy)

    def _edge_seq(self, idx):
        seq = []
        while idx >= 0:
            seq.append(int(self.NI[idx, 4]))
            idx = int(self.NI[idx, 3])
        seq.reverse()
        return seq

    # -- main loop ---------------------------------------------------------------
    def run(self, field_bound=False):
        s, m = self.s, self.m
        dist_v = self.dist_v
        src = self.source
        slot = {tid: k for k, tid in enumerate(self.tids)}
        by_face = {}
        for tid, entries in self.targets.items():
            for f, b in entries:
                by_face.setdefault(f, []).append((slot[tid], b))

        init_i, init_f = [], []
        for f in s.faces_of(src):
            b = s.bary_in_face(src, f)
            ch = s.charts[f]
            sx, sy = np.asarray(b) @ ch
            imgs = [(float(ch[k][0] - sx), float(ch[k][1] - sy)) for k in range(3)]
            tri = m.F[f]
            for k in range(3):
                d = _hypot(*imgs[k])
                if d < dist_v[tri[k]]:
                    dist_v[tri[k]] = d
            if self.record:
                self.direct[f] = imgs
            for k_t, tb in by_face.get(f, ()):
                qx = tb[0] * imgs[0][0] + tb[1] * imgs[1][0] + tb[2] * imgs[2][0]
                qy = tb[0] * imgs[0][1] + tb[1] * imgs[1][1] + tb[2] * imgs[2][1]
                length = _hypot(qx, qy)
                if self.slack > 0.0:
                    self.direct_hits.append((k_t, length, qx, qy, f, imgs))
                self._offer_direct(k_t, length, qx, qy)
            for k in range(3):
                if b[k] <= 0.0:
                    continue
                ia, ib = tri[(k + 1) % 3], tri[(k + 2) % 3]
                e = m.FE[f][k]
                fs = m.EF[e]
                g = fs[1] if fs[0] == f else fs[0]
                (ax, ay), (bx, by) = imgs[(k + 1) % 3], imgs[(k + 2) % 3]
                w0x, w0y, w1x, w1y = ax, ay, bx, by
                if w0x * w1y - w0y * w1x < 0.0:
                    w0x, w0y, w1x, w1y = w1x, w1y, w0x, w0y
                init_i.append((g, ia, ib, -1, e))
                init_f.append((ax, ay, bx, by, w0x, w0y, w1x, w1y))

        nf = len(m.F)
        counts = np.zeros(nf + 1, dtype=np.int64)
        rows = sorted((f, k_t, b) for f, lst in by_face.items() for k_t, b in lst)
        for f, _, _ in rows:
            counts[f + 1] += 1
        tgt_ptr = np.cumsum(counts)
        tgt_id = np.array([k_t for _, k_t, _ in rows], dtype=np.int64)
        tgt_bary = np.array([b for _, _, b in rows], dtype=np.float64).reshape(-1, 3)
        if self.tids and np.isfinite(self._best).all():
            bound0 = float(self._best.max()) + max(self.tie, self.slack)
        else:
            bound0 = math.inf
        astar = np.asarray(self.astar if self.astar is not None else (0.0, 0.0, 0.0), dtype=float)
        (status, NI, NF, popped, HI, HF, _nh, RI, RF, _nr) = run_kernel(
            m.F_arr, m.FE_arr, m.EF_arr, m.elen_arr, m.V_arr,
            np.array(init_i, dtype=np.int64).reshape(-1, 5),
            np.array(init_f, dtype=np.float64).reshape(-1, 8), dist_v,
            tgt_ptr, tgt_id, tgt_bary, self._best, self._best_node, self._best_q,
            astar, self.astar is not None, int(self.budget), bool(self.record),
            float(self.slack), bool(field_bound), self.tie, self.prune_tol,
            1e-14 * m.scale, m.max_edge, bound0)
        self.NI, self.NF = NI, NF
        self.HI, self.HF = HI, HF
        self.RI, self.RF = RI, RF
        self.popped = int(popped)
        if status == STATUS_BUDGET:
            best = float(self._best.min()) if len(self._best) else math.inf
            raise BudgetExceeded(f"exact search exceeded {self.budget} nodes", best)
        return self

    def hits(self, tid):
        """All target hits ``(length, node, qx, qy, face, imgs)`` (slack runs)."""
        k = self.tids.index(tid)
        out = [(length, -1, qx, qy, f, imgs)
               for k_t, length, qx, qy, f, imgs in self.direct_hits if k_t == k]
        for (t_k, node), (length, qx, qy, cx, cy) in zip(self.HI.tolist(), self.HF.tolist()):
            if t_k == k:
                out.append((length, node, qx, qy, int(self.NI[node, 0]),
                            self._images(node, cx, cy)))
        return out

    def _images(self, node, cx, cy):
        g, ia, ib = (int(v) for v in self.NI[node, :3])
        ax, ay, bx, by = self.NF[node, :4].tolist()
        img = {ia: (ax, ay), ib: (bx, by)}
        tri = self.m.F[g]
        return [img.get(v, (cx, cy)) for v in tri]

    # -- results -----------------------------------------------------------------
    def path_to(self, tid, target: SurfacePoint) -> GeodesicPath:
        s = self.s
        k = self.tids.index(tid)
        node = int(self._best_node[k])
        qx, qy = self._best_q[k]
        chain = []
        idx = node
        while idx >= 0:
            chain.append(idx)
            idx = int(self.NI[idx, 3])
        chain.reverse()
        points = [self.source]
        edges = []
        for idx in chain:
            g, ia, ib, _, e = (int(v) for v in self.NI[idx])
            ax, ay, bx, by = self.NF[idx, :4]
            dx, dy = bx - ax, by - ay
            den = qx * dy - qy * dx
            t = (ax * qy - ay * qx) / den if den != 0.0 else 0.5
            t = min(1.0, max(0.0, t))
            tri = s.faces[g].tolist()
            bary = [0.0, 0.0, 0.0]
            bary[tri.index(ia)] = 1.0 - t
            bary[tri.index(ib)] = t
            points.append(s.canonical(g, bary))
            edges.append(e)
        points.append(target)
        return GeodesicPath(points, float(self._best[k]), edges, s)


def _target_entries(s: TriSurface, q: SurfacePoint):
    return [(f, s.bary_in_face(q, f)) for f in s.faces_of(q)]


def exact_distance(s: TriSurface, p: SurfacePoint, q: SurfacePoint, budget=None) -> GeodesicPath:
    """Shortest path from ``p`` to ``q`` and its length.

    Among equally short paths the one with the lexicographically smallest
    edge sequence is returned.
    """
    _mesh(s)
    if s.points_equal(p, q):
        return GeodesicPath([p], 0.0, [], s)
    if s.common_face(p, q) is not None:
        d = float(np.linalg.norm(s.embed(p) - s.embed(q)))
        return GeodesicPath([p, q], d, [], s)
    prop = _Propagation(s, p, {0: _target_entries(s, q)}, astar=tuple(s.embed(q)), budget=budget)
    prop.run()
    if not math.isfinite(prop.best[0]):
        raise BudgetExceeded("target not reached", math.inf)
    return prop.path_to(0, q)


def distance(s: TriSurface, p: SurfacePoint, q: SurfacePoint, budget=None) -> float:
    """Length of :func:`exact_distance` without building the path."""
    _mesh(s)
    if s.points_equal(p, q):
        return 0.0
    if s.common_face(p, q) is not None:
        return float(np.linalg.norm(s.embed(p) - s.embed(q)))
    prop = _Propagation(s, p, {0: _target_entries(s, q)}, astar=tuple(s.embed(q)), budget=budget)
    prop.run()
    d = prop.best[0]
    if not math.isfinite(d):
        raise BudgetExceeded("target not reached", math.inf)
    return d


@dataclass
class Branch:
    """One locally shortest straight line between two points.

    Gradients are unit 2D vectors in the chart of ``source_face`` /
    ``target_face``: moving the target by ``d`` (chart coordinates) changes
    the length by ``target_grad @ d`` to first order.
    """

    length: float
    source_face: int
    source_grad: tuple
    target_face: int
    target_grad: tuple
    edges: list


def branches(s: TriSurface, p: SurfacePoint, q: SurfacePoint, slack, budget=None):
    """All straight unfolded connections from ``p`` to ``q`` no longer than
    the shortest one plus ``slack``, shortest first."""
    if s.common_face(p, q) is not None and s.points_equal(p, q):
        return []
    prop = _Propagation(s, p, {0: _target_entries(s, q)}, astar=tuple(s.embed(q)),
                        budget=budget, slack=max(slack, 1e-300))
    prop.run()
    best = prop.best[0]
    out, keys = [], []
    seen = set()
    for length, node, qx, qy, face, imgs in sorted(prop.hits(0), key=lambda h: h[0]):
        if length > best + slack:
            continue
        if node < 0:
            src_face = face
        else:
            root = node
            while prop.NI[root, 3] >= 0:
                root = int(prop.NI[root, 3])
            src_face = s.other_face(int(prop.NI[root, 4]), int(prop.NI[root, 0]))
        seq = tuple(prop._edge_seq(node)) if node >= 0 else ()
        if (seq, face) in seen:
            continue
        seen.add((seq, face))
        ux, uy = qx / length, qy / length
        # rotation from the face chart to the unfolding, transposed onto (ux, uy)
        ch = s.charts[face]
        a, b, c, d = ch[1, 0] - ch[0, 0], ch[2, 0] - ch[0, 0], ch[1, 1] - ch[0, 1], ch[2, 1] - ch[0, 1]
        det = a * d - b * c
        ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
        pa, pb = imgs[1][0] - imgs[0][0], imgs[2][0] - imgs[0][0]
        pc, pd = imgs[1][1] - imgs[0][1], imgs[2][1] - imgs[0][1]
        r00, r01 = pa * ia + pb * ic, pa * ib + pb * id_
        r10, r11 = pc * ia + pd * ic, pc * ib + pd * id_
        tg = (r00 * ux + r10 * uy, r01 * ux + r11 * uy)
        br = Branch(float(length), int(src_face), (-ux, -uy), int(face),
                    (float(tg[0]), float(tg[1])), list(seq))
        # a point on an edge is reached through either incident face; keep
        # one representative per geometric connection, the fewest crossings
        key = (*_dir3(s, src_face, br.source_grad), *_dir3(s, face, br.target_grad))
        # hits come shortest first, so only the tail can have the same length
        tol = 1e-9 * max(1.0, br.length)
        for k in range(len(out) - 1, -1, -1):
            other = out[k]
            if other.length < br.length - tol:
                out.append(br)
                keys.append(key)
                break
            if max(abs(u - v) for u, v in zip(keys[k], key)) <= 1e-7:
                if len(br.edges) < len(other.edges):
                    out[k], keys[k] = br, key
                break
        else:
            out.append(br)
            keys.append(key)
    return out


def _dir3(s: TriSurface, face, v):
    _, e1, e2 = s._frame
    return (v[0] * e1[face] + v[1] * e2[face]).tolist()


def chart_rotation(s: TriSurface, f_from, f_to):
    """Rotation taking chart vectors of ``f_from`` to the chart of the
    adjacent face ``f_to`` unfolded across their shared edge."""
    if f_from == f_to:
        return np.eye(2)
    shared = set(s.faces[f_from].tolist()) & set(s.faces[f_to].tolist())
    if len(shared) < 2:
        raise InvalidArgument("faces are not adjacent")
    a, b = sorted(shared)
    ta, tb = s.faces[f_from].tolist(), s.faces[f_to].tolist()
    qa, qb = s.charts[f_from][ta.index(a)], s.charts[f_from][ta.index(b)]
    ra, rb = s.charts[f_to][tb.index(a)], s.charts[f_to][tb.index(b)]
    rot = math.atan2(*(rb - ra)[::-1]) - math.atan2(*(qb - qa)[::-1])
    c, si = math.cos(rot), math.sin(rot)
    return np.array([[c, -si], [si, c]])


def distances_from(s: TriSurface, p: SurfacePoint, targets, budget=None):
    """Exact distances from ``p`` to every point in ``targets`` (one propagation)."""
    entries = {i: _target_entries(s, q) for i, q in enumerate(targets)}
    prop = _Propagation(s, p, entries, budget=budget)
    prop.run()
    return np.array([prop.best[i] for i in range(len(targets))])


class DistanceField:
    """All distances from one source, queryable at arbitrary surface points.

    The propagation runs to exhaustion once; afterwards each query only
    scans the windows recorded on the query point's face.
    """

    def __init__(self, s: TriSurface, source: SurfacePoint, budget=None):
        self.surface = s
        self.source = source
        prop = _Propagation(s, source, None, budget=budget, record=True).run(field_bound=True)
        self.vertex_distances = np.array(prop.dist_v)
        self.nodes = prop.popped
        self._direct = {f: np.array(imgs) for f, imgs in prop.direct.items()}
        self._windows = self._group_windows(prop)

    @staticmethod
    def _group_windows(prop):
        # rows: images of the face's 3 vertices (in face order) then w0, w1
        if len(prop.RI) == 0:
            return {}
        idx = prop.RI[:, 0]
        NI, NF = prop.NI[idx], prop.NF[idx]
        faces = NI[:, 0]
        tri = prop.m.F_arr[faces]
        rows = np.empty((len(idx), 10))
        for k in range(3):
            is_a = tri[:, k] == NI[:, 1]
            is_b = tri[:, k] == NI[:, 2]
            x = np.where(is_a, NF[:, 0], np.where(is_b, NF[:, 2], prop.RF[:, 0]))
            y = np.where(is_a, NF[:, 1], np.where(is_b, NF[:, 3], prop.RF[:, 1]))
            rows[:, 2 * k] = x
            rows[:, 2 * k + 1] = y
        rows[:, 6:10] = NF[:, 4:8]
        order = np.argsort(faces, kind="stable")
        faces, rows = faces[order], rows[order]
        cuts = np.flatnonzero(np.diff(faces)) + 1
        return {int(g[0]): r for g, r in zip(np.split(faces, cuts), np.split(rows, cuts))}

    def _face_distance(self, f, b):
        best = math.inf
        d = self._direct.get(f)
        if d is not None:
            q = b[0] * d[0] + b[1] * d[1] + b[2] * d[2]
            best = _hypot(q[0], q[1])
        w = self._windows.get(f)
        if w is not None:
            qx = b[0] * w[:, 0] + b[1] * w[:, 2] + b[2] * w[:, 4]
            qy = b[0] * w[:, 1] + b[1] * w[:, 3] + b[2] * w[:, 5]
            nq = np.hypot(qx, qy)
            n0 = np.hypot(w[:, 6], w[:, 7])
            n1 = np.hypot(w[:, 8], w[:, 9])
            ok = ((w[:, 6] * qy - w[:, 7] * qx >= -1e-12 * n0 * nq)
                  & (qx * w[:, 9] - qy * w[:, 8] >= -1e-12 * n1 * nq))
            if ok.any():
                best = min(best, float(nq[ok].min()))
        return best

    def distance(self, p: SurfacePoint) -> float:
        s = self.surface
        v = s.point_vertex(p)
        if v is not None:
            return float(self.vertex_distances[v])
        if p == self.source:
            return 0.0
        return min(self._face_distance(f, s.bary_in_face(p, f)) for f in s.faces_of(p))

    def __call__(self, p):
        return self.distance(p)


# ---------------------------------------------------------------------------
# subdivision-graph oracle
# ---------------------------------------------------------------------------

def edge_fractions(level: int):
    """Edge parameters of the extra graph nodes at ``level``.

    All fractions ``i / m`` with ``2 <= m <= level + 1``: this contains the
    ``level`` evenly spaced points and every lower level, so refining the
    level only adds nodes.
    """
    return sorted({i / m for m in range(2, level + 2) for i in range(1, m)})


def _subdivision_graph(s: TriSurface, level: int):
    V = len(s.vertices)
    fr = np.array(edge_fractions(level))
    k = len(fr)
    a, b = s.vertices[s.edges[:, 0]], s.vertices[s.edges[:, 1]]
    extra = (a[:, None, :] * (1 - fr)[None, :, None] + b[:, None, :] * fr[None, :, None]).reshape(-1, 3)
    pos = np.vstack([s.vertices, extra])
    face_nodes = []
    for f, tri in enumerate(s.faces.tolist()):
        nodes = list(tri)
        for j in range(3):
            e = int(s.face_edges[f, j])
            nodes.extend(V + e * k + i for i in range(k))
        face_nodes.append(nodes)
    pairs = set()
    for nodes in face_nodes:
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                u, v = nodes[i], nodes[j]
                pairs.add((u, v) if u < v else (v, u))
    pairs = np.array(sorted(pairs))
    w = np.linalg.norm(pos[pairs[:, 0]] - pos[pairs[:, 1]], axis=1)
    return pos, face_nodes, pairs, w


def graph_distance(s: TriSurface, p: SurfacePoint, q: SurfacePoint, level: int) -> float:
    """Shortest path length in the face-complete subdivision graph.

    Nodes are the mesh vertices plus the points of :func:`edge_fractions`
    on every edge (a superset of ``level`` evenly spaced points), joined
    whenever they share a face; ``p`` and ``q`` are linked to
    every node of the faces containing them. This is an upper bound on the
    intrinsic distance that never increases with ``level``.
    """
    if level < 0:
        raise InvalidArgument("level must be >= 0")
    pos, face_nodes, pairs, w = s.cached(("graph", level), lambda: _subdivision_graph(s, level))
    n = len(pos)
    ip, iq = n, n + 1
    rows, cols, vals = [pairs[:, 0]], [pairs[:, 1]], [w]
    xp, xq = s.embed(p), s.embed(q)
    for idx, x, pt in ((ip, xp, p), (iq, xq, q)):
        nodes = sorted({k for f in s.faces_of(pt) for k in face_nodes[f]})
        d = np.linalg.norm(pos[nodes] - x, axis=1)
        rows.append(np.full(len(nodes), idx))
        cols.append(np.array(nodes))
        vals.append(d)
    if s.common_face(p, q) is not None:
        rows.append(np.array([ip]))
        cols.append(np.array([iq]))
        vals.append(np.array([np.linalg.norm(xp - xq)]))
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    # explicit zeros would vanish from a sparse matrix
    v = np.maximum(v, 1e-300)
    g = sparse.coo_matrix((v, (r, c)), shape=(n + 2, n + 2)).tocsr()
    d = dijkstra(g, directed=False, indices=ip)
    out = float(d[iq])
    return 0.0 if out <= 1e-290 else out


# ---------------------------------------------------------------------------
# walking on the surface
# ---------------------------------------------------------------------------

def point_along(path: GeodesicPath, sarc: float) -> SurfacePoint:
    """Point at arclength ``sarc`` from the source of ``path``."""
    s = path.surface
    L = path.length
    slack = 1e-12 * max(1.0, L)
    if sarc < -slack or sarc > L + slack:
        raise InvalidArgument(f"arclength {sarc} outside [0, {L}]")
    if len(path.points) == 1:
        return path.points[0]
    cum = path.arclengths()
    # rescale so that the polyline total matches the reported length
    if cum[-1] > 0:
        sarc = sarc * cum[-1] / L if L > 0 else 0.0
    if sarc <= 0:
        return path.points[0]
    if sarc >= cum[-1]:
        return path.points[-1]
    i = int(np.searchsorted(cum, sarc, side="right")) - 1
    i = min(max(i, 0), len(path.points) - 2)
    seg = cum[i + 1] - cum[i]
    t = 0.0 if seg <= 0 else (sarc - cum[i]) / seg
    return s.interpolate(path.points[i], path.points[i + 1], t)


def _vertex_fan(s: TriSurface, v):
    """Faces around vertex ``v`` in counterclockwise order with corner angles."""
    f0 = s.vertex_faces[v][0]
    fan = []
    f = f0
    for _ in range(len(s.vertex_faces[v]) + 1):
        tri = s.faces[f].tolist()
        i = tri.index(v)
        a = s.vertices[tri[(i + 1) % 3]] - s.vertices[v]
        b = s.vertices[tri[(i + 2) % 3]] - s.vertices[v]
        ang = math.atan2(float(np.linalg.norm(np.cross(a, b))), float(a @ b))
        fan.append((f, i, ang))
        e = s.edge_index[tuple(sorted((v, tri[(i + 2) % 3])))]
        f = s.other_face(e, f)
        if f == f0:
            break
    return fan


def shoot(s: TriSurface, p: SurfacePoint, angle: float, length: float) -> SurfacePoint:
    """Walk straight for ``length`` from ``p`` in direction ``angle``.

    The angle is measured in the chart of ``p.face`` (from its first edge).
    At a vertex the full turn is spread proportionally over the cone angle.
    A walk that runs into a vertex stops there.
    """
    if length <= 0:
        return p
    v = s.point_vertex(p)
    if v is not None:
        fan = s.cached(("fan", v), lambda: _vertex_fan(s, v))
        total = sum(a for _, _, a in fan)
        beta = (angle % (2 * math.pi)) / (2 * math.pi) * total
        for f, i, ang in fan:
            if beta <= ang or f == fan[-1][0]:
                break
            beta -= ang
        ch = s.charts[f]
        a = ch[(i + 1) % 3] - ch[i]
        base = math.atan2(a[1], a[0])
        pos = ch[i].copy()
        d = np.array([math.cos(base + beta), math.sin(base + beta)])
        face = f
    else:
        face = p.face
        pos = np.asarray(p.bary) @ s.charts[face]
        d = np.array([math.cos(angle), math.sin(angle)])
    remaining = float(length)
    tiny = 1e-13 * s.bbox_diag
    for _ in range(100000):
        ch = s.charts[face]
        best_t, best_k = math.inf, -1
        for k in range(3):
            q1, q2 = ch[(k + 1) % 3], ch[(k + 2) % 3]
            ev = q2 - q1
            nrm = np.array([ev[1], -ev[0]])  # outward for a CCW triangle
            den = float(d @ nrm)
            if den <= 1e-15 * np.linalg.norm(ev):
                continue
            t = float((q1 - pos) @ nrm) / den
            if t < best_t:
                best_t, best_k = t, k
        if best_k < 0 or best_t >= remaining:
            return s.point_from_chart(face, pos + remaining * d)
        best_t = max(best_t, 0.0)
        exit_pt = pos + best_t * d
        remaining -= best_t
        tri = s.faces[face].tolist()
        ka, kb = (best_k + 1) % 3, (best_k + 2) % 3
        qa, qb = ch[ka], ch[kb]
        el = float(np.linalg.norm(qb - qa))
        u = float((exit_pt - qa) @ (qb - qa)) / (el * el)
        if u * el <= tiny:
            return s.vertex_point(tri[ka])
        if (1 - u) * el <= tiny:
            return s.vertex_point(tri[kb])
        va, vb = tri[ka], tri[kb]
        e = int(s.face_edges[face, best_k])
        g = s.other_face(e, face)
        gtri = s.faces[g].tolist()
        ra, rb = s.charts[g][gtri.index(va)], s.charts[g][gtri.index(vb)]
        rot = math.atan2(*(rb - ra)[::-1]) - math.atan2(*(qb - qa)[::-1])
        cr, sr = math.cos(rot), math.sin(rot)
        R = np.array([[cr, -sr], [sr, cr]])
        pos = ra + R @ (exit_pt - qa)
        d = R @ d
        face = g
    raise RuntimeError("walk did not terminate")
