"""Constructive checks of the antipodal diameter theorem.

For a sphere-like surface ``M`` with a fixed-point-free involutive isometry
``I``, some diameter pair is antipodal. The argument behind this is run
here step by step on concrete data:

1. on a shortest curve from ``x`` to ``I(x)`` pick the pair ``(u, I(u))``
   of points of the curve with the smallest distance
   (:func:`minimal_antipodal_pair`);
2. the sub-arc between them together with its image is a simple closed
   curve (:func:`build_jordan_curve`);
3. cutting the surface along it leaves exactly two regions
   (:func:`classify_regions`);
4. ``I`` exchanges the two regions (:func:`check_region_swap`);
5. a shortest curve from ``y`` to ``I(y)`` must cross the closed curve, and
   the triangle inequalities through the crossing point are tight
   (:func:`find_common_point`, :func:`equality_chain_check`).

The same statement is checked exactly on weighted graphs with a
fixed-point-free involution (:func:`discrete_theorem_check`).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.spatial import cKDTree
from shapely.geometry import LineString, MultiLineString, Point, Polygon
from shapely.ops import split

from . import geodesic
from .errors import (GeodiamError, InvalidArgument, InvalidSpace, RegionCountViolation,
                     SimplicityViolation, SwapViolation)
from .geodesic import GeodesicPath, point_along
from .involution import Involution
from .surface import SurfacePoint, TriSurface

BROUWER_STEP = (
    "I maps the closed curve onto itself, so it either preserves or exchanges the two "
    "complementary regions. If it preserved a region D, it would map the closed disk "
    "formed by D and the curve onto itself, and Brouwer's fixed-point theorem would give "
    "a fixed point. I has no fixed point, so it exchanges the regions."
)

DEFAULT_RESOLUTION = 4096


# ---------------------------------------------------------------------------
# segment geometry
# ---------------------------------------------------------------------------

def segment_distances(p0, p1, q0, q1):
    """Closest points between every segment ``p0[i]p1[i]`` and ``q0[j]q1[j]``.

    Returns ``(dist, s, t)``, each of shape (N, M), with the closest points
    at ``p0 + s (p1 - p0)`` and ``q0 + t (q1 - q0)``. Segments must have
    positive length.
    """
    p0, p1, q0, q1 = (np.asarray(a, dtype=float) for a in (p0, p1, q0, q1))
    d1 = (p1 - p0)[:, None, :]
    d2 = (q1 - q0)[None, :, :]
    r = p0[:, None, :] - q0[None, :, :]
    a = np.einsum("ijk,ijk->ij", d1, d1 + 0 * d2)
    e = np.einsum("ijk,ijk->ij", d2 + 0 * d1, d2)
    b = np.einsum("ijk,ijk->ij", d1, d2)
    c = np.einsum("ijk,ijk->ij", d1, r)
    f = np.einsum("ijk,ijk->ij", d2, r)
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-14 * a * e, np.clip((b * f - c * e) / denom, 0.0, 1.0), 0.0)
        t = (b * s + f) / e
        lo, hi = t < 0.0, t > 1.0
        s = np.where(lo, np.clip(-c / a, 0.0, 1.0), s)
        s = np.where(hi, np.clip((b - c) / a, 0.0, 1.0), s)
        t = np.clip(t, 0.0, 1.0)
    cp = p0[:, None, :] + s[..., None] * d1
    cq = q0[None, :, :] + t[..., None] * d2
    return np.linalg.norm(cp - cq, axis=2), s, t


def _point_segment(x, q0, q1):
    """Distance and parameter from the points ``x`` (N, 3) to the segments (M)."""
    d = (q1 - q0)[None, :, :]
    w = x[:, None, :] - q0[None, :, :]
    dd = np.einsum("ijk,ijk->ij", d + 0 * w, d + 0 * w)
    t = np.clip(np.einsum("ijk,ijk->ij", w, d + 0 * w) / dd, 0.0, 1.0)
    return np.linalg.norm(w - t[..., None] * d, axis=2), t


def _clean(s: TriSurface, points):
    """Drop consecutive duplicates (zero-length segments)."""
    out = [points[0]]
    for p in points[1:]:
        if not s.points_equal(p, out[-1]):
            out.append(p)
    return out


def _project(cum, emb, x):
    """Distance from ``x`` to the polyline ``emb`` and the arclength of the
    closest point."""
    dist, t = _point_segment(np.atleast_2d(x), emb[:-1], emb[1:])
    j = int(np.argmin(dist[0]))
    return float(dist[0, j]), float(cum[j] + t[0, j] * (cum[j + 1] - cum[j]))


# ---------------------------------------------------------------------------
# minimal antipodal pair
# ---------------------------------------------------------------------------

@dataclass
class AntipodalPair:
    """Points ``u`` and ``v = I(u)`` on a curve, at arclengths ``s_u < s_v``."""

    u: SurfacePoint
    v: SurfacePoint
    distance: float
    s_u: float
    s_v: float
    candidates: int = 0

    def __iter__(self):
        return iter((self.u, self.v, self.distance))


def subpath(path: GeodesicPath, s0: float, s1: float) -> GeodesicPath:
    """Part of ``path`` between arclengths ``s0`` and ``s1`` (reversed if s0 > s1)."""
    s = path.surface
    reverse = s0 > s1
    lo, hi = (s1, s0) if reverse else (s0, s1)
    cum = path.arclengths()
    scale = cum[-1] / path.length if path.length > 0 else 1.0
    a, b = point_along(path, lo), point_along(path, hi)
    inner = [p for p, c in zip(path.points, cum) if lo * scale < c < hi * scale]
    pts = _clean(s, [a] + inner + [b])
    edges = [e for e in (s.point_edge(q) for q in pts[1:-1]) if e is not None]
    if reverse:
        pts = pts[::-1]
        edges = edges[::-1]
    emb = np.array([s.embed(p) for p in pts])
    length = float(np.linalg.norm(np.diff(emb, axis=0), axis=1).sum()) if len(pts) > 1 else 0.0
    return GeodesicPath(pts, length, edges, s)


def _crossing_params(s, pts, img):
    """Arclength-free description of the common points of two polylines.

    Returns a list of ``(i, si)`` meaning the point at fraction ``si`` of
    segment ``i`` of ``pts`` also lies on ``img``. Overlapping stretches are
    represented by their end points.
    """
    P = np.array([s.embed(p) for p in pts])
    Q = np.array([s.embed(p) for p in img])
    if len(P) < 2 or len(Q) < 2:
        return []
    eps = s.eps_pt
    dist, sp, _ = segment_distances(P[:-1], P[1:], Q[:-1], Q[1:])
    out = [(int(i), float(sp[i, j])) for i, j in zip(*np.nonzero(dist <= eps))]
    # segment end points of either curve lying on the other curve
    dp, _ = _point_segment(P, Q[:-1], Q[1:])
    for k in np.flatnonzero(dp.min(axis=1) <= eps):
        out.append((min(int(k), len(P) - 2), 0.0 if k < len(P) - 1 else 1.0))
    dq, tq = _point_segment(Q, P[:-1], P[1:])
    for k in np.flatnonzero(dq.min(axis=1) <= eps):
        i = int(np.argmin(dq[k]))
        out.append((i, float(tq[k, i])))
    return out


def minimal_antipodal_pair(path: GeodesicPath, inv: Involution,
                           resolution: int = DEFAULT_RESOLUTION) -> AntipodalPair:
    """Pair ``(u, I(u))`` of points on ``path`` with the smallest distance.

    ``path`` should join some ``x`` to ``I(x)``, so the end points always
    qualify. Candidates come from ``resolution`` evenly spaced arclength
    samples ``u`` whose image lies on the path, plus every exact common
    point of the path and its image (the samples alone almost never hit an
    isolated crossing). Distances are exact geodesic distances.
    """
    if resolution < 2:
        raise InvalidArgument("resolution must be >= 2")
    s = path.surface
    L = path.length
    emb = path.embedded()
    cum = path.arclengths()
    if len(emb) < 2 or L <= 0:
        raise InvalidArgument("path has zero length")
    eps = s.eps_pt
    cands = {}

    def add(su):
        u = point_along(path, min(max(su, 0.0), L))
        v = inv.apply(u)
        d, sv = _project(cum, emb, s.embed(v))
        if d > eps:
            return
        sv *= L / cum[-1]
        key = (round(min(su, sv) / s.bbox_diag, 9), round(max(su, sv) / s.bbox_diag, 9))
        if key not in cands:
            cands[key] = (su, sv, u, v)

    for su in np.linspace(0.0, L, resolution):
        add(float(su))
    img = [inv.apply(p) for p in path.points]
    scale = L / cum[-1]
    for i, si in _crossing_params(s, path.points, img):
        z = cum[i] + si * (cum[i + 1] - cum[i])
        add(float(z * scale))
        # the crossing z lies on the image, so I(z) lies on the path as well
        zp = point_along(path, min(z * scale, L))
        d, sz = _project(cum, emb, s.embed(inv.apply(zp)))
        if d <= eps:
            add(sz * scale)
    best = None
    for su, sv, u, v in cands.values():
        if su > sv:
            su, sv, u, v = sv, su, v, u
        d = geodesic.distance(s, u, v)
        key = (d, su)
        if best is None or key < best[0]:
            best = (key, AntipodalPair(u, v, d, su, sv))
    pair = best[1]
    pair.candidates = len(cands)
    return pair


def interior_antipodal_pairs(path: GeodesicPath, inv: Involution, resolution=DEFAULT_RESOLUTION):
    """Common points of ``path`` and its image other than the end points.

    Empty exactly when the only pairs ``(u, I(u))`` on the path are its
    end points (at the scan resolution plus exact crossings).
    """
    s = path.surface
    img = [inv.apply(p) for p in path.points]
    cum = path.arclengths()
    tol = 10 * s.eps_pt
    hits = []
    for i, si in _crossing_params(s, path.points, img):
        z = cum[i] + si * (cum[i + 1] - cum[i])
        if tol < z < cum[-1] - tol:
            hits.append(float(z))
    emb = path.embedded()
    for su in np.linspace(0.0, path.length, resolution)[1:-1]:
        w = s.embed(inv.apply(point_along(path, float(su))))
        d, sv = _project(cum, emb, w)
        if d <= s.eps_pt and tol < sv < cum[-1] - tol:
            hits.append(float(su))
    return sorted(set(round(h, 12) for h in hits))


# ---------------------------------------------------------------------------
# closed curve
# ---------------------------------------------------------------------------

@dataclass
class ClosedCurve:
    """A closed polyline on the surface; ``points[0] == points[-1]``.

    ``gamma`` runs from ``u`` to ``v`` and ``image`` (its image under the
    involution) from ``v`` back to ``u``.
    """

    points: list
    gamma: list
    image: list
    surface: TriSurface = field(repr=False, default=None)

    @property
    def u(self):
        return self.gamma[0]

    @property
    def v(self):
        return self.gamma[-1]

    def embedded(self):
        return np.array([self.surface.embed(p) for p in self.points])

    @property
    def length(self):
        return float(np.linalg.norm(np.diff(self.embedded(), axis=0), axis=1).sum())

    @property
    def segments(self):
        return len(self.points) - 1

    def distance_to(self, x):
        emb = self.embedded()
        d, _ = _point_segment(np.atleast_2d(x), emb[:-1], emb[1:])
        return float(d.min())

    def to_dict(self):
        return {"points": self.embedded().tolist(), "length": self.length,
                "gamma_points": len(self.gamma), "segments": self.segments}


def closed_curve(s: TriSurface, points) -> ClosedCurve:
    """Wrap a closed polyline (consecutive points sharing a face)."""
    pts = list(points)
    if not s.points_equal(pts[0], pts[-1]):
        pts.append(pts[0])
    pts = _clean(s, pts)
    if not s.points_equal(pts[0], pts[-1]):
        pts.append(pts[0])
    curve = ClosedCurve(pts, pts, [], s)
    _check_simple(s, curve)
    return curve


def _check_simple(s, curve):
    emb = curve.embedded()
    n = len(emb) - 1
    if n < 3:
        raise SimplicityViolation(f"closed curve needs at least 3 segments, got {n}")
    for p, q in zip(curve.points[:-1], curve.points[1:]):
        if s.common_face(p, q) is None:
            raise SimplicityViolation("consecutive curve points do not share a face")
    dist, _, _ = segment_distances(emb[:-1], emb[1:], emb[:-1], emb[1:])
    eps = s.eps_pt
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :])
    adjacent = (gap == 1) | (gap == n - 1)
    bad = (dist <= eps) & ~adjacent & (gap > 0)
    if bad.any():
        i, j = (int(k) for k in np.argwhere(bad)[0])
        raise SimplicityViolation(f"segments {i} and {j} of the closed curve meet "
                                  f"at distance {dist[i, j]:.3g}")
    # adjacent segments may only share their joint: no folding back
    for i in range(n):
        j = (i + 1) % n
        far_i, far_j = emb[i], emb[j + 1]
        di, _ = _point_segment(far_i[None], emb[j:j + 1], emb[j + 1:j + 2])
        dj, _ = _point_segment(far_j[None], emb[i:i + 1], emb[i + 1:i + 2])
        if min(float(di[0, 0]), float(dj[0, 0])) <= eps:
            raise SimplicityViolation(f"the closed curve folds back at point {j}")


def build_jordan_curve(path: GeodesicPath, inv: Involution) -> ClosedCurve:
    """Close ``path`` (from ``u`` to ``I(u)``) with its own image.

    The image starts at ``I(u)``, the end of ``path``, and ends at
    ``I(I(u)) = u``, so the concatenation is closed. Raises
    :class:`SimplicityViolation` if the result touches itself anywhere
    other than at the two joints.
    """
    s = path.surface
    pts = _clean(s, list(path.points))
    if len(pts) < 2:
        raise SimplicityViolation("path is a single point")
    img = [inv.apply(p) for p in pts]
    if not s.points_equal(img[0], pts[-1], 10 * s.eps_pt):
        raise SimplicityViolation("path does not end at the image of its start")
    loop = pts + img[1:-1] + [pts[0]]
    curve = ClosedCurve(loop, pts, img, s)
    _check_simple(s, curve)
    return curve


# ---------------------------------------------------------------------------
# region split
# ---------------------------------------------------------------------------

@dataclass
class Fragment:
    face: int
    polygon: Polygon
    region: int = 0


@dataclass
class RegionSplit:
    """The surface cut along a closed curve into face fragments.

    ``region1`` and ``region2`` hold fragment indices into ``fragments``.
    """

    curve: ClosedCurve
    fragments: list
    region1: list
    region2: list
    adjacency: list
    surface: TriSurface = field(repr=False, default=None)

    def faces(self, region):
        frags = self.region1 if region == 1 else self.region2
        return sorted({self.fragments[i].face for i in frags})

    def whole_faces(self, region):
        """Faces lying entirely in ``region``."""
        s = self.surface
        frags = self.region1 if region == 1 else self.region2
        out = []
        for i in frags:
            fr = self.fragments[i]
            if abs(fr.polygon.area - s.face_areas[fr.face]) <= 1e-9 * s.face_areas[fr.face]:
                out.append(fr.face)
        return sorted(out)

    def area(self, region):
        frags = self.region1 if region == 1 else self.region2
        return float(sum(self.fragments[i].polygon.area for i in frags))

    def region_of(self, p: SurfacePoint, tol=None):
        """1 or 2 for a point off the curve, 0 for a point on it."""
        s = self.surface
        tol = 10 * s.eps_pt if tol is None else tol
        if self.curve.distance_to(s.embed(p)) <= tol:
            return 0
        best, label = math.inf, 0
        for f in s.faces_of(p):
            pt = Point(*s.chart_xy(p, f))
            for i in self._by_face.get(f, ()):
                d = self.fragments[i].polygon.distance(pt)
                if d < best:
                    best, label = d, self.fragments[i].region
        return label

    def sample(self, region, n, rng):
        """``n`` area-uniform points inside ``region``."""
        s = self.surface
        frags = self.region1 if region == 1 else self.region2
        areas = np.array([self.fragments[i].polygon.area for i in frags])
        picks = rng.choice(len(frags), size=n, p=areas / areas.sum())
        out = []
        for k in picks:
            fr = self.fragments[frags[int(k)]]
            minx, miny, maxx, maxy = fr.polygon.bounds
            for _ in range(10000):
                xy = (rng.uniform(minx, maxx), rng.uniform(miny, maxy))
                if fr.polygon.contains(Point(xy)):
                    break
            else:  # pragma: no cover - only for extremely thin slivers
                xy = fr.polygon.representative_point().coords[0]
            out.append(s.point_from_chart(fr.face, xy))
        return out

    @property
    def _by_face(self):
        cache = self.__dict__.get("_face_index")
        if cache is None:
            cache = {}
            for i, fr in enumerate(self.fragments):
                cache.setdefault(fr.face, []).append(i)
            self.__dict__["_face_index"] = cache
        return cache

    def to_dict(self):
        return {"fragments": len(self.fragments),
                "region1": {"fragments": len(self.region1), "faces": self.faces(1),
                            "area": self.area(1)},
                "region2": {"fragments": len(self.region2), "faces": self.faces(2),
                            "area": self.area(2)}}


def _edge_param(s, e, x):
    a, b = s.edges[e]
    A, B = s.vertices[a], s.vertices[b]
    return float((x - A) @ (B - A) / ((B - A) @ (B - A)))


def _edge_of_points(s, p, q):
    """Edge containing both points, or ``None``."""
    cand = None
    for pt in (p, q):
        v = s.point_vertex(pt)
        e = s.point_edge(pt)
        es = set()
        if v is not None:
            es = {k for f in s.vertex_faces[v] for k in s.face_edges[f].tolist()
                  if v in s.edges[k]}
        elif e is not None:
            es = {e}
        cand = es if cand is None else cand & es
        if not cand:
            return None
    return min(cand)


def _merge(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return out


def _overlap(ia, ib, blocked, tol):
    """Total length of ``ia`` and ``ib`` in common, minus ``blocked``."""
    total = 0.0
    for a0, a1 in ia:
        for b0, b1 in ib:
            lo, hi = max(a0, b0), min(a1, b1)
            if hi - lo <= tol:
                continue
            free = hi - lo
            for c0, c1 in blocked:
                free -= max(0.0, min(hi, c1) - max(lo, c0))
            total += max(free, 0.0)
    return total


def classify_regions(s: TriSurface, curve: ClosedCurve) -> RegionSplit:
    """Cut the surface along ``curve`` and flood-fill the pieces.

    Faces crossed by the curve are split in their 2D charts; fragments of
    neighbouring faces are joined when they share a stretch of the common
    edge that the curve does not run along. Raises
    :class:`RegionCountViolation` unless exactly two components remain.
    """
    cuts, blocked = {}, {}
    for p, q in zip(curve.points[:-1], curve.points[1:]):
        e = _edge_of_points(s, p, q)
        if e is not None:
            t0, t1 = sorted((_edge_param(s, e, s.embed(p)), _edge_param(s, e, s.embed(q))))
            blocked.setdefault(e, []).append((t0, t1))
            continue
        f = s.common_face(p, q)
        if f is None:
            raise InvalidArgument("consecutive curve points do not share a face")
        cuts.setdefault(f, []).append((s.chart_xy(p, f), s.chart_xy(q, f)))

    fragments = []
    for f in range(len(s.faces)):
        tri = Polygon(s.charts[f])
        if f not in cuts:
            fragments.append(Fragment(f, tri))
            continue
        ext = 1e-7 * float(np.max(np.linalg.norm(np.diff(s.charts[f][[0, 1, 2, 0]], axis=0), axis=1)))
        lines = []
        for a, b in cuts[f]:
            d = (b - a) / np.linalg.norm(b - a)
            lines.append(LineString([a - ext * d, b + ext * d]))
        pieces = split(tri, MultiLineString(lines))
        min_area = 1e-12 * tri.area
        for g in pieces.geoms:
            if g.area > min_area:
                fragments.append(Fragment(f, g))

    # stretches of each face edge covered by each fragment
    tol_rel = 1e-9
    spans = []
    for fr in fragments:
        f = fr.face
        ch = s.charts[f]
        tri = s.faces[f].tolist()
        coords = np.asarray(fr.polygon.exterior.coords)
        per_edge = {}
        for k in range(3):
            e = int(s.face_edges[f, k])
            a, b = s.edges[e]
            A, B = ch[tri.index(a)], ch[tri.index(b)]
            d = B - A
            ll = float(d @ d)
            rel = coords - A
            t = rel @ d / ll
            off = np.abs(rel[:, 0] * d[1] - rel[:, 1] * d[0]) / math.sqrt(ll)
            on = off <= tol_rel * math.sqrt(ll)
            iv = [(min(t[i], t[i + 1]), max(t[i], t[i + 1]))
                  for i in range(len(coords) - 1) if on[i] and on[i + 1]]
            if iv:
                per_edge[e] = _merge(iv)
        spans.append(per_edge)

    by_face = {}
    for i, fr in enumerate(fragments):
        by_face.setdefault(fr.face, []).append(i)
    rows, cols = [], []
    for e, (f, g) in enumerate(s.edge_faces):
        blk = _merge(blocked.get(e, []))
        for i in by_face[f]:
            ia = spans[i].get(e)
            if not ia:
                continue
            for j in by_face[g]:
                ib = spans[j].get(e)
                if ib and _overlap(ia, ib, blk, tol_rel) > tol_rel:
                    rows.append(i)
                    cols.append(j)
    n = len(fragments)
    graph = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, labels = connected_components(graph, directed=False)
    adjacency = sorted(set((min(a, b), max(a, b)) for a, b in zip(rows, cols)))
    if ncomp != 2:
        sizes = np.bincount(labels).tolist()
        raise RegionCountViolation(
            f"cutting along the curve left {ncomp} regions, expected 2",
            {"components": int(ncomp), "component_sizes": sizes, "fragments": n,
             "fragment_faces": [fr.face for fr in fragments], "adjacency": adjacency})
    first = int(labels[0])
    for i, fr in enumerate(fragments):
        fr.region = 1 if labels[i] == first else 2
    r1 = [i for i, fr in enumerate(fragments) if fr.region == 1]
    r2 = [i for i, fr in enumerate(fragments) if fr.region == 2]
    return RegionSplit(curve, fragments, r1, r2, adjacency, s)


# ---------------------------------------------------------------------------
# region swap
# ---------------------------------------------------------------------------

@dataclass
class SwapReport:
    samples_per_region: int
    checked: int
    violations: int
    on_curve: int
    curve_invariant: bool
    swap_holds: bool
    justification: str = BROUWER_STEP

    def to_dict(self):
        return asdict(self)


def check_region_swap(inv: Involution, split_: RegionSplit, nsamples=200, seed=0) -> SwapReport:
    """Check that ``I`` maps each region of ``split_`` into the other one.

    ``nsamples`` area-uniform points are drawn from each region. Raises
    :class:`SwapViolation` with the first offending sample. The topological
    reason (a preserved region would force a fixed point) is recorded in
    the report rather than re-proved.
    """
    from .diameter import require_fixed_point_free

    if nsamples < 1:
        raise InvalidArgument("nsamples must be >= 1")
    require_fixed_point_free(inv)
    s = split_.surface
    rng = np.random.default_rng(seed)
    # the curve must be carried onto itself
    curve_inv = all(split_.curve.distance_to(s.embed(inv.apply(p))) <= 10 * s.eps_pt
                    for p in split_.curve.points)
    checked = on_curve = 0
    for region in (1, 2):
        for p in split_.sample(region, nsamples, rng):
            here = split_.region_of(p)
            if here == 0:
                on_curve += 1
                continue
            there = split_.region_of(inv.apply(p))
            checked += 1
            if there != 3 - here:
                raise SwapViolation(
                    f"point in region {here} is mapped into region {there}",
                    {"point": s.embed(p).tolist(), "image": s.embed(inv.apply(p)).tolist(),
                     "region": here, "image_region": there})
    return SwapReport(samples_per_region=nsamples, checked=checked, violations=0,
                      on_curve=on_curve, curve_invariant=bool(curve_inv),
                      swap_holds=bool(curve_inv))


# ---------------------------------------------------------------------------
# equality chain
# ---------------------------------------------------------------------------

@dataclass
class ChainReport:
    distances: dict
    a: float
    b: float
    c: float
    d: float
    antipodal_difference: float
    nonnegative: bool
    tight: bool
    diameter: float | None = None
    matches_diameter: bool | None = None

    def to_dict(self):
        return asdict(self)


def equality_chain_check(s: TriSurface, inv: Involution, x: SurfacePoint, y: SurfacePoint,
                         t: SurfacePoint, diameter=None) -> ChainReport:
    """Slack in the four triangle inequalities through ``t``.

    ``a = rho(x,t) + rho(t,y) - rho(x,y)``,
    ``b = rho(Ix,t) + rho(t,Iy) - rho(Ix,Iy)``,
    ``c = rho(x,t) + rho(Ix,t) - rho(x,Ix)`` and
    ``d = rho(y,t) + rho(Iy,t) - rho(y,Iy)``.
    All four are non-negative; for a diameter pair ``(x, y)`` and ``t`` on
    shortest curves from ``x`` to ``Ix`` and from ``y`` to ``Iy`` they all
    vanish, which forces ``rho(x,Ix) = rho(y,Iy) = diam``.
    """
    ix, iy = inv.apply(x), inv.apply(y)

    def rho(p, q):
        return geodesic.distance(s, p, q)

    dist = {"x_t": rho(x, t), "t_y": rho(t, y), "x_y": rho(x, y),
            "Ix_t": rho(ix, t), "t_Iy": rho(t, iy), "Ix_Iy": rho(ix, iy),
            "x_Ix": rho(x, ix), "y_Iy": rho(y, iy)}
    a = dist["x_t"] + dist["t_y"] - dist["x_y"]
    b = dist["Ix_t"] + dist["t_Iy"] - dist["Ix_Iy"]
    c = dist["x_t"] + dist["Ix_t"] - dist["x_Ix"]
    d = dist["t_y"] + dist["t_Iy"] - dist["y_Iy"]
    lo = -s.tol.straight_rel * max(dist.values())
    vals = (a, b, c, d)
    matches = None
    if diameter is not None:
        matches = bool(abs(dist["x_Ix"] - diameter) <= s.eps_chain
                       and abs(dist["y_Iy"] - diameter) <= s.eps_chain)
    return ChainReport(distances=dist, a=a, b=b, c=c, d=d,
                       antipodal_difference=abs(dist["x_Ix"] - dist["y_Iy"]),
                       nonnegative=bool(min(vals) >= lo),
                       tight=bool(max(vals) <= s.eps_chain),
                       diameter=diameter, matches_diameter=matches)


def find_common_point(s: TriSurface, path: GeodesicPath, curve: ClosedCurve):
    """Point of ``path`` closest to ``curve`` and the gap between them.

    Returns ``(t, gap)``; ``gap`` is zero (up to rounding) when the path
    crosses the curve.
    """
    pts = _clean(s, list(path.points))
    if len(pts) == 1:
        return pts[0], curve.distance_to(s.embed(pts[0]))
    P = np.array([s.embed(p) for p in pts])
    Q = curve.embedded()
    dist, sp, _ = segment_distances(P[:-1], P[1:], Q[:-1], Q[1:])
    i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
    t = s.interpolate(pts[i], pts[i + 1], float(sp[i, j]))
    return t, float(dist[i, j])


# ---------------------------------------------------------------------------
# proof pipeline
# ---------------------------------------------------------------------------

@dataclass
class ProofReport:
    passed: bool
    stages: dict
    failed_stage: str | None = None
    error: str | None = None

    def to_dict(self):
        return asdict(self)


def run_proof(s: TriSurface, inv: Involution, x: SurfacePoint, y: SurfacePoint,
              diameter=None, resolution=DEFAULT_RESOLUTION, swap_samples=200, seed=0,
              chain_low=-1e-9) -> ProofReport:
    """Carry out every construction of the argument for the pair ``(x, y)``.

    Stages: shortest curve ``x -> I(x)``, minimal antipodal pair, closed
    curve, two regions, region swap, common point with a shortest curve
    ``y -> I(y)`` and the equality chain. A stage error stops the run and is
    recorded in the report.
    """
    stages = {}
    stage = "geodesic"
    try:
        gx = geodesic.exact_distance(s, x, inv.apply(x))
        stages[stage] = {"length": gx.length, "points": len(gx.points)}

        stage = "minimal_pair"
        res = resolution
        pair = minimal_antipodal_pair(gx, inv, res)
        arc = subpath(gx, pair.s_u, pair.s_v)
        rescans = 0
        while interior_antipodal_pairs(arc, inv, res) and rescans < 3:
            # the scan missed a closer pair on the sub-arc; look again there
            res *= 4
            rescans += 1
            pair = minimal_antipodal_pair(arc, inv, res)
            arc = subpath(arc, pair.s_u, pair.s_v)
        leftover = interior_antipodal_pairs(arc, inv, res)
        stages[stage] = {"distance": pair.distance, "s_u": pair.s_u, "s_v": pair.s_v,
                         "is_endpoint_pair": bool(pair.s_u <= s.eps_pt
                                                  and pair.s_v >= gx.length - s.eps_pt),
                         "candidates": pair.candidates, "rescans": rescans,
                         "interior_pairs": len(leftover), "ok": not leftover}
        if leftover:
            raise SimplicityViolation("sub-arc still has interior antipodal pairs")

        stage = "jordan_curve"
        curve = build_jordan_curve(arc, inv)
        stages[stage] = {"segments": curve.segments, "length": curve.length, "simple": True}

        stage = "regions"
        regions = classify_regions(s, curve)
        stages[stage] = {"regions": 2, **regions.to_dict()}

        stage = "region_swap"
        swap = check_region_swap(inv, regions, swap_samples, seed)
        ry, riy = regions.region_of(y), regions.region_of(inv.apply(y))
        stages[stage] = {**swap.to_dict(), "y_region": ry, "Iy_region": riy}
        if not swap.swap_holds:
            raise SwapViolation("the closed curve is not invariant under the involution")

        stage = "common_point"
        gy = geodesic.exact_distance(s, y, inv.apply(y))
        t, gap = find_common_point(s, gy, curve)
        stages[stage] = {"gap": gap, "t": s.embed(t).tolist(),
                         "ok": bool(gap <= s.eps_chain)}
        if gap > s.eps_chain:
            raise GeodiamError(f"shortest curve y -> I(y) misses the closed curve by {gap:.3g}")

        stage = "equality_chain"
        chain = equality_chain_check(s, inv, x, y, t, diameter)
        ok = (min(chain.a, chain.b, chain.c, chain.d) >= chain_low and chain.tight)
        stages[stage] = {**chain.to_dict(), "ok": bool(ok)}
        if not ok:
            raise GeodiamError("equality chain is not tight")
    except GeodiamError as exc:
        return ProofReport(False, stages, stage, f"{type(exc).__name__}: {exc}")
    return ProofReport(True, stages)


def trial_seeds(seed, trials):
    """Hull seeds of a multi-trial run: ``trials`` draws from ``default_rng(seed)``."""
    return [int(v) for v in np.random.default_rng(seed).integers(0, 2**31 - 1, size=trials)]


def run_trial(hull_seed, n=50, shape=(1.0, 1.0, 1.0), samples=500, steps=60,
              resolution=DEFAULT_RESOLUTION, swap_samples=200):
    """One full theorem trial on ``build_symmetric_hull(n, shape, hull_seed)``."""
    from .diameter import Sampler, antipodal_diameter, brute_force_diameter
    from .involution import central_symmetry
    from .surface import build_symmetric_hull, validate_sphere_topology

    t0 = time.perf_counter()
    out = {"hull_seed": hull_seed, "n": n, "passed": False}
    try:
        s = build_symmetric_hull(n, shape, hull_seed)
        out["valid"] = validate_sphere_topology(s).passed
        inv = central_symmetry(s)
        sampler = Sampler(count=samples)
        anti = antipodal_diameter(s, inv, sampler, True, steps)
        brute = brute_force_diameter(s, sampler, True, steps, involution=inv)
        defect = anti.diameter - brute.diameter
        out["antipodal_diameter"] = anti.diameter
        out["brute_diameter"] = brute.diameter
        out["agreement_defect"] = defect
        out["agreement"] = bool(abs(defect) <= s.eps_match)
        x, y = brute.pair
        proof = run_proof(s, inv, x, y, diameter=max(anti.diameter, brute.diameter),
                          resolution=resolution, swap_samples=swap_samples, seed=hull_seed)
        out["proof"] = proof.to_dict()
        out["passed"] = bool(out["valid"] and out["agreement"] and proof.passed)
    except GeodiamError as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    out["elapsed"] = time.perf_counter() - t0
    return out


def verify_theorem(trials=20, seed=1, **kwargs):
    """Run :func:`run_trial` on ``trials`` seeded hulls and aggregate."""
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    results = [run_trial(hs, **kwargs) for hs in trial_seeds(seed, trials)]
    return {"trials": trials, "seed": seed,
            "passed": sum(r["passed"] for r in results),
            "all_passed": all(r["passed"] for r in results),
            "results": results}


# ---------------------------------------------------------------------------
# discrete length spaces
# ---------------------------------------------------------------------------

@dataclass
class DiscreteLengthSpace:
    """A weighted graph with a fixed-point-free involution on its nodes."""

    n: int
    edges: list
    involution: list

    def validate(self):
        if self.n < 2:
            raise InvalidSpace("need at least 2 nodes")
        perm = np.asarray(self.involution, dtype=np.int64)
        if perm.shape != (self.n,) or sorted(perm.tolist()) != list(range(self.n)):
            raise InvalidSpace("involution must be a permutation of the nodes")
        if (perm[perm] != np.arange(self.n)).any():
            raise InvalidSpace("involution is not involutive")
        if (perm == np.arange(self.n)).any():
            raise InvalidSpace("involution has a fixed node")
        for i, j, w in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n) or i == j:
                raise InvalidSpace(f"bad edge ({i}, {j})")
            if not w > 0:
                raise InvalidSpace(f"edge ({i}, {j}) has non-positive weight {w}")
        if connected_components(self.matrix(), directed=False)[0] != 1:
            raise InvalidSpace("graph is disconnected")
        return self

    def matrix(self):
        best = {}
        for i, j, w in self.edges:
            key = (min(i, j), max(i, j))
            best[key] = min(best.get(key, math.inf), float(w))
        if not best:
            return sparse.csr_matrix((self.n, self.n))
        ij = np.array(list(best.keys()))
        w = np.array(list(best.values()))
        m = sparse.coo_matrix((w, (ij[:, 0], ij[:, 1])), shape=(self.n, self.n))
        return (m + m.T).tocsr()

    @property
    def integer_weights(self):
        return all(float(w).is_integer() for _, _, w in self.edges)

    def to_dict(self):
        return {"n": self.n, "edges": [[int(i), int(j), w] for i, j, w in self.edges],
                "involution": [int(v) for v in self.involution]}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(int(data["n"]), [(int(i), int(j), w) for i, j, w in data["edges"]],
                       [int(v) for v in data["involution"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpace(f"malformed length space: {exc}") from None

    @classmethod
    def read(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidSpace(f"cannot read {path}: {exc}") from None
        return cls.from_dict(data)


@dataclass
class DiscreteReport:
    nodes: int
    diameter: float
    antipodal_max: float
    equal: bool
    exact: bool
    tolerance: float
    diameter_pair: tuple
    antipodal_node: int

    def to_dict(self):
        return asdict(self)


def discrete_theorem_check(space: DiscreteLengthSpace, tol=1e-12) -> DiscreteReport:
    """All-pairs shortest paths; compare the diameter with the antipodal max.

    With integer weights every path length is an exactly representable
    integer, so the comparison is exact; otherwise ``tol`` is used.
    """
    space.validate()
    dist = shortest_path(space.matrix(), method="D", directed=False)
    i, j = np.unravel_index(int(np.argmax(dist)), dist.shape)
    D = float(dist[i, j])
    perm = np.asarray(space.involution)
    anti = dist[np.arange(space.n), perm]
    k = int(np.argmax(anti))
    A = float(anti[k])
    exact = space.integer_weights
    used = 0.0 if exact else tol * max(1.0, D)
    return DiscreteReport(nodes=space.n, diameter=D, antipodal_max=A,
                          equal=bool(abs(D - A) <= used), exact=exact, tolerance=used,
                          diameter_pair=(int(i), int(j)), antipodal_node=k)


def cycle_space(half: int) -> DiscreteLengthSpace:
    """Cycle with ``2 * half`` unit edges and the half-turn ``i -> i + half``."""
    if half < 1:
        raise InvalidArgument("half must be >= 1")
    n = 2 * half
    return DiscreteLengthSpace(n, [(i, (i + 1) % n, 1) for i in range(n)],
                               [(i + half) % n for i in range(n)])


def _antipodal_perm(pos):
    dist, idx = cKDTree(pos).query(-pos)
    if (dist > 1e-9).any():
        raise InvalidSpace("node positions are not symmetric")
    return idx.tolist()


def _graph_from_triangles(pos, tris, weights):
    edges = set()
    for t in tris:
        for k in range(3):
            a, b = t[k], t[(k + 1) % 3]
            edges.add((min(a, b), max(a, b)))
    out = []
    for a, b in sorted(edges):
        w = 1 if weights == "unit" else float(np.linalg.norm(pos[a] - pos[b]))
        out.append((a, b, w))
    return DiscreteLengthSpace(len(pos), out, _antipodal_perm(pos))


def octahedron_space(weights="unit") -> DiscreteLengthSpace:
    """Octahedron graph with ``v -> -v``."""
    pos = np.vstack([np.eye(3), -np.eye(3)])
    tris = [(a, b, c) for a in (0, 3) for b in (1, 4) for c in (2, 5)]
    return _graph_from_triangles(pos, tris, weights)


def icosahedron_space(subdivisions=0, weights="unit") -> DiscreteLengthSpace:
    """Icosahedron graph, each triangle split ``subdivisions`` times into 4,
    with the antipodal map. Weights are ``"unit"`` or ``"euclidean"`` (on
    the flat subdivided icosahedron)."""
    phi = (1 + math.sqrt(5)) / 2
    pos = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
           (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
           (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    pos = [np.array(p, dtype=float) for p in pos]
    tris = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(subdivisions):
        mids = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in mids:
                mids[key] = len(pos)
                pos.append((pos[a] + pos[b]) / 2)
            return mids[key]

        new = []
        for a, b, c in tris:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        tris = new
    return _graph_from_triangles(np.array(pos), tris, weights)


def surface_space(s: TriSurface, inv: Involution) -> DiscreteLengthSpace:
    """Edge graph of a mesh (Euclidean edge lengths) with a vertex involution."""
    edges = [(int(a), int(b), s.edge_length(int(a), int(b))) for a, b in s.edges]
    return DiscreteLengthSpace(len(s.vertices), edges, inv.perm.tolist())
