"""Independent reference computations used to derive and check test values.

Nothing here imports the geodesic engine. Distances come from a plain
exhaustive enumeration of face sequences, each unfolded into the plane
from the raw vertex coordinates.
"""

import math

import numpy as np


def _adjacency(faces):
    """Map each face to its (neighbour, shared vertex pair) list."""
    owner = {}
    for f, tri in enumerate(faces):
        for k in range(3):
            a, b = tri[k], tri[(k + 1) % 3]
            owner.setdefault((min(a, b), max(a, b)), []).append(f)
    adj = [[] for _ in faces]
    for (a, b), fs in owner.items():
        if len(fs) == 2:
            f, g = fs
            adj[f].append((g, (a, b)))
            adj[g].append((f, (a, b)))
    return adj


def _face_containing(V, faces, x, tol):
    """Faces whose triangle contains the 3D point ``x`` (within ``tol``)."""
    out = []
    for f, (i, j, k) in enumerate(faces):
        a, b, c = V[i], V[j], V[k]
        n = np.cross(b - a, c - a)
        n2 = n @ n
        if abs((x - a) @ n) > tol * math.sqrt(n2):
            continue
        # barycentric by areas
        w0 = np.cross(c - b, x - b) @ n / n2
        w1 = np.cross(a - c, x - c) @ n / n2
        w2 = 1.0 - w0 - w1
        if min(w0, w1, w2) >= -1e-9:
            out.append((f, np.array([w0, w1, w2])))
    return out


def _place_first(V, tri):
    a, b, c = (V[v] for v in tri)
    ab = np.linalg.norm(b - a)
    ex = (b - a) / ab
    n = np.cross(b - a, c - a)
    ey = np.cross(n / np.linalg.norm(n), ex)
    return {tri[0]: np.zeros(2), tri[1]: np.array([ab, 0.0]),
            tri[2]: np.array([(c - a) @ ex, (c - a) @ ey])}


def _place_across(V, layout, tri, a, b):
    """Planar position of the third vertex of ``tri`` across edge ``(a, b)``,
    on the opposite side of the line from the vertex already laid out."""
    (c,) = [v for v in tri if v not in (a, b)]
    pa, pb = layout[a], layout[b]
    A, B, C = V[a], V[b], V[c]
    ab = np.linalg.norm(B - A)
    t = (C - A) @ (B - A) / ab
    h = math.sqrt(max(np.linalg.norm(C - A) ** 2 - t * t, 0.0))
    ex = (pb - pa) / ab
    ey = np.array([-ex[1], ex[0]])
    return c, pa + t * ex, h, ey


def unfolding_distance(V, faces, p, q, max_faces=6, tol=1e-9):
    """Shortest straight unfolded connection from 3D point ``p`` to ``q``.

    Every face sequence starting at a face containing ``p`` and crossing
    at most ``max_faces - 1`` edges is unfolded; a sequence counts when the
    straight segment to the unfolded ``q`` passes through every shared edge
    in order. Returns ``(length, face_sequence)``; ``inf`` if none fits.
    """
    V = np.asarray(V, dtype=float)
    faces = [tuple(int(v) for v in t) for t in faces]
    p, q = np.asarray(p, float), np.asarray(q, float)
    scale = float(np.linalg.norm(V.max(0) - V.min(0)))
    adj = _adjacency(faces)
    qfaces = {f: w for f, w in _face_containing(V, faces, q, tol * scale)}
    best = (math.inf, None)
    for f0, wp in _face_containing(V, faces, p, tol * scale):
        tri = faces[f0]
        lay = _place_first(V, tri)
        P = sum(wp[k] * lay[tri[k]] for k in range(3))
        stack = [(f0, lay, [f0], [])]
        while stack:
            f, lay, seq, crossed = stack.pop()
            tri = faces[f]
            if f in qfaces:
                w = qfaces[f]
                Q = sum(w[k] * lay[tri[k]] for k in range(3))
                L = float(np.linalg.norm(Q - P))
                if L < best[0] - 1e-12 and _passes(P, Q, crossed, tol):
                    best = (L, list(seq))
            if len(seq) >= max_faces:
                continue
            for g, (a, b) in adj[f]:
                if len(seq) > 1 and g == seq[-2]:
                    continue
                c, base, h, ey = _place_across(V, lay, faces[g], a, b)
                # the new vertex goes to the side opposite the current face
                (o,) = [v for v in tri if v not in (a, b)]
                side = (lay[o] - lay[a]) @ ey
                nl = dict(lay)
                nl[c] = base - h * ey if side > 0 else base + h * ey
                stack.append((g, nl, seq + [g], crossed + [(lay[a], lay[b])]))
    return best


def _passes(P, Q, crossed, tol):
    d = Q - P
    last = -1e-12
    for A, B in crossed:
        e = B - A
        den = d[0] * e[1] - d[1] * e[0]
        if abs(den) < 1e-300:
            return False
        w = A - P
        t = (w[0] * e[1] - w[1] * e[0]) / den  # along P->Q
        u = (w[0] * d[1] - w[1] * d[0]) / den  # along the edge
        if u < -tol or u > 1 + tol or t < last - tol or t > 1 + tol:
            return False
        last = t
    return True


def _angle(u, v):
    return math.atan2(float(np.linalg.norm(np.cross(u, v))), float(u @ v))


def turning_defects(points, edge_ends):
    """Turning angle of a surface polyline at each interior point.

    ``edge_ends[i]`` is one endpoint ``A`` (3D) of the edge carrying interior
    point ``i + 1``. The polyline develops into a straight line exactly when
    the two angles it makes with the edge on the ``A`` side add up to pi.
    """
    pts = [np.asarray(x, float) for x in points]
    out = []
    for i in range(1, len(pts) - 1):
        P, A = pts[i], np.asarray(edge_ends[i - 1], float)
        out.append(abs(math.pi - _angle(pts[i - 1] - P, A - P) - _angle(A - P, pts[i + 1] - P)))
    return np.array(out)


def straightness_bound(points, edge_ends):
    """Upper bound on the distance of the developed polyline from its chord."""
    pts = np.asarray(points, float)
    if len(pts) < 3:
        return 0.0
    length = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
    return float(turning_defects(points, edge_ends).sum() * length)


def sampled_farthest(V, faces, p, grid, max_faces=6):
    """Farthest point from ``p`` over a list of 3D grid points (oracle distances)."""
    best = (-1.0, None)
    for x in grid:
        d, _ = unfolding_distance(V, faces, p, x, max_faces)
        if d > best[0]:
            best = (d, np.asarray(x, float))
    return best
