"""Closed triangulated surfaces, surface points and topology validation."""

from __future__ import annotations

import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DegenerateInput, InvalidArgument, MeshFormatError, OffSurface


@dataclass(frozen=True)
class SurfacePoint:
    """A point on a surface: face index plus barycentric weights.

    Use :meth:`TriSurface.canonical` to build one; it snaps points lying on
    an edge or vertex to the smallest incident face so that equal points
    share a representation.
    """

    face: int
    bary: tuple[float, float, float]

    def key(self):
        return (self.face, tuple(round(b, 12) for b in self.bary))


@dataclass
class ValidationReport:
    passed: bool
    euler_characteristic: int
    vertices: int
    edges: int
    faces: int
    nonmanifold_edges: list = field(default_factory=list)
    degenerate_faces: list = field(default_factory=list)
    orientation_violations: list = field(default_factory=list)
    convexity_violations: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


class TriSurface:
    """Closed oriented triangle mesh carrying its intrinsic length metric.

    Parameters
    ----------
    vertices : array_like, shape (V, 3)
    faces : array_like of int, shape (F, 3)
        Counterclockwise when seen from outside.
    center : array_like, optional
        Declared symmetry center.
    convex : bool, optional
        Convexity flag. When omitted it is inferred from the geometry.
    tolerances : Tolerances, optional

    The arrays are made read-only; a surface is never mutated after
    construction.
    """

    def __init__(self, vertices, faces, center=None, convex=None,
                 tolerances: Tolerances = DEFAULT_TOLERANCES):
        v = np.array(vertices, dtype=float).reshape(-1, 3)
        f = np.array(faces, dtype=np.int64).reshape(-1, 3)
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise InvalidArgument("face index out of range")
        v.setflags(write=False)
        f.setflags(write=False)
        self.vertices = v
        self.faces = f
        self.center = None if center is None else np.array(center, dtype=float)
        self.tol = tolerances
        self._cache = {}

        lo, hi = v.min(axis=0), v.max(axis=0)
        self.bbox_diag = float(np.linalg.norm(hi - lo))
        self.eps_pt = tolerances.pt_rel * self.bbox_diag
        self.eps_deg = tolerances.deg_rel * self.bbox_diag ** 2
        self.eps_iso = tolerances.iso_rel * self.bbox_diag
        self.eps_match = tolerances.match_rel * self.bbox_diag
        self.eps_chain = tolerances.chain_rel * self.bbox_diag

        self._build_topology()
        self._build_geometry()
        if convex is None:
            convex = not self.convexity_violations()
        self.convex = bool(convex)

    # -- construction helpers -------------------------------------------
    def _build_topology(self):
        edge_index = {}
        edge_faces = []
        face_edges = np.empty((len(self.faces), 3), dtype=np.int64)
        for fi, tri in enumerate(self.faces.tolist()):
            for k in range(3):
                a, b = tri[(k + 1) % 3], tri[(k + 2) % 3]
                key = (a, b) if a < b else (b, a)
                e = edge_index.get(key)
                if e is None:
                    e = len(edge_faces)
                    edge_index[key] = e
                    edge_faces.append([])
                edge_faces[e].append(fi)
                face_edges[fi, k] = e
        self.edge_index = edge_index
        self.edges = np.array(list(edge_index), dtype=np.int64).reshape(-1, 2)
        self.edge_faces = [tuple(fs) for fs in edge_faces]
        face_edges.setflags(write=False)
        self.face_edges = face_edges
        vf = [[] for _ in range(len(self.vertices))]
        for fi, tri in enumerate(self.faces.tolist()):
            for a in tri:
                vf[a].append(fi)
        self.vertex_faces = [tuple(sorted(fs)) for fs in vf]

    def _build_geometry(self):
        v, f = self.vertices, self.faces
        if not len(f):
            self.face_areas = np.zeros(0)
            self.face_normals = np.zeros((0, 3))
            self.charts = np.zeros((0, 3, 2))
            return
        p0, p1, p2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
        cr = np.cross(p1 - p0, p2 - p0)
        dbl = np.linalg.norm(cr, axis=1)
        self.face_areas = 0.5 * dbl
        with np.errstate(invalid="ignore", divide="ignore"):
            self.face_normals = cr / dbl[:, None]
        # 2D chart per face: v0 at the origin, v1 on the +x axis
        l01 = np.linalg.norm(p1 - p0, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            e1 = (p1 - p0) / l01[:, None]
        e2 = np.cross(self.face_normals, e1)
        charts = np.zeros((len(f), 3, 2))
        charts[:, 1, 0] = l01
        charts[:, 2, 0] = np.einsum("ij,ij->i", p2 - p0, e1)
        charts[:, 2, 1] = np.einsum("ij,ij->i", p2 - p0, e2)
        self.charts = charts
        self._frame = (p0, e1, e2)
        # altitude of each corner over its opposite edge, used for snapping
        elen = np.stack([np.linalg.norm(p2 - p1, axis=1),
                         np.linalg.norm(p0 - p2, axis=1), l01], axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            self._altitudes = dbl[:, None] / elen

    # -- basic measures ------------------------------------------------
    @property
    def area(self):
        return float(self.face_areas.sum())

    @property
    def euler_characteristic(self):
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def edge_length(self, a, b):
        return float(np.linalg.norm(self.vertices[a] - self.vertices[b]))

    @property
    def mean_edge_length(self):
        e = self.edges
        return float(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1).mean())

    @property
    def max_edge_length(self):
        e = self.edges
        return float(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1).max())

    def other_face(self, edge, face):
        fs = self.edge_faces[edge]
        if len(fs) != 2:
            raise InvalidArgument(f"edge {edge} is not manifold")
        return fs[1] if fs[0] == face else fs[0]

    def vertex_curvature(self):
        """Angle defect 2*pi - (sum of corner angles) at every vertex."""
        total = np.zeros(len(self.vertices))
        v, f = self.vertices, self.faces
        for k in range(3):
            a = v[f[:, k]]
            b = v[f[:, (k + 1) % 3]] - a
            c = v[f[:, (k + 2) % 3]] - a
            ang = np.arctan2(np.linalg.norm(np.cross(b, c), axis=1), np.einsum("ij,ij->i", b, c))
            np.add.at(total, f[:, k], ang)
        return 2 * math.pi - total

    # -- points ----------------------------------------------------------
    def embed(self, p: SurfacePoint):
        tri = self.vertices[self.faces[p.face]]
        return np.asarray(p.bary) @ tri

    def chart_xy(self, p: SurfacePoint, face=None):
        """2D coordinates of ``p`` in the chart of ``face`` (default its own)."""
        if face is None or face == p.face:
            return np.asarray(p.bary) @ self.charts[p.face]
        b = self.bary_in_face(p, face)
        if b is None:
            raise InvalidArgument("point does not lie on the requested face")
        return np.asarray(b) @ self.charts[face]

    def point_from_chart(self, face, xy):
        c = self.charts[face]
        m = np.array([[c[1, 0] - c[0, 0], c[2, 0] - c[0, 0]],
                      [c[1, 1] - c[0, 1], c[2, 1] - c[0, 1]]])
        s, t = np.linalg.solve(m, np.asarray(xy, dtype=float) - c[0])
        return self.canonical(face, (1.0 - s - t, s, t))

    def canonical(self, face, bary) -> SurfacePoint:
        """Snap ``bary`` onto edges/vertices and pick the smallest incident face."""
        b = np.clip(np.asarray(bary, dtype=float), 0.0, None)
        s = b.sum()
        if s <= 0:
            raise InvalidArgument("barycentric weights must have a positive sum")
        b = b / s
        alt = self._altitudes[face]
        b[b * alt <= self.eps_pt] = 0.0
        if not b.any():
            b[np.argmax(bary)] = 1.0
        b = b / b.sum()
        zeros = int((b == 0).sum())
        tri = self.faces[face]
        if zeros == 2:
            return self.vertex_point(int(tri[int(np.argmax(b))]))
        if zeros == 1:
            k = int(np.argmin(b))
            e = int(self.face_edges[face, k])
            target = min(self.edge_faces[e])
            if target != face:
                weights = {int(tri[j]): b[j] for j in range(3) if j != k}
                gtri = self.faces[target]
                b = np.array([weights.get(int(vv), 0.0) for vv in gtri])
                face = target
        return SurfacePoint(int(face), tuple(float(x) for x in b))

    def vertex_point(self, v) -> SurfacePoint:
        f = self.vertex_faces[v][0]
        b = [0.0, 0.0, 0.0]
        b[list(self.faces[f]).index(v)] = 1.0
        return SurfacePoint(int(f), tuple(b))

    def point_vertex(self, p: SurfacePoint):
        """Vertex index if ``p`` sits exactly on a vertex, else ``None``."""
        if sum(1 for b in p.bary if b == 0.0) == 2:
            return int(self.faces[p.face][int(np.argmax(p.bary))])
        return None

    def point_edge(self, p: SurfacePoint):
        """Edge index if ``p`` lies in the interior of an edge, else ``None``."""
        zeros = [k for k, b in enumerate(p.bary) if b == 0.0]
        if len(zeros) == 1:
            return int(self.face_edges[p.face, zeros[0]])
        return None

    def faces_of(self, p: SurfacePoint):
        """All faces whose closure contains ``p``, ascending."""
        v = self.point_vertex(p)
        if v is not None:
            return list(self.vertex_faces[v])
        e = self.point_edge(p)
        if e is not None:
            return sorted(self.edge_faces[e])
        return [p.face]

    def bary_in_face(self, p: SurfacePoint, face):
        if face == p.face:
            return p.bary
        if face not in self.faces_of(p):
            return None
        weights = {int(self.faces[p.face][j]): p.bary[j] for j in range(3)}
        return tuple(float(weights.get(int(vv), 0.0)) for vv in self.faces[face])

    def common_face(self, p: SurfacePoint, q: SurfacePoint):
        """Smallest face containing both points, or ``None``."""
        fq = set(self.faces_of(q))
        for f in self.faces_of(p):
            if f in fq:
                return f
        return None

    def points_equal(self, p: SurfacePoint, q: SurfacePoint, eps=None):
        eps = self.eps_pt if eps is None else eps
        return float(np.linalg.norm(self.embed(p) - self.embed(q))) <= eps

    def interpolate(self, p: SurfacePoint, q: SurfacePoint, t):
        """Point at fraction ``t`` of the straight in-face segment p->q."""
        f = self.common_face(p, q)
        if f is None:
            raise InvalidArgument("points do not share a face")
        bp = np.asarray(self.bary_in_face(p, f))
        bq = np.asarray(self.bary_in_face(q, f))
        return self.canonical(f, (1 - t) * bp + t * bq)

    # -- convexity ---------------------------------------------------------
    def convexity_violations(self):
        out = []
        v = self.vertices
        for e, fs in enumerate(self.edge_faces):
            if len(fs) != 2:
                continue
            f, g = fs
            n1, n2 = self.face_normals[f], self.face_normals[g]
            a, b = self.edges[e]
            w = [x for x in self.faces[g] if x != a and x != b][0]
            side = float(n1 @ (v[w] - v[a]))
            theta = math.atan2(float(np.linalg.norm(np.cross(n1, n2))), float(n1 @ n2))
            dihedral = math.pi - theta if side <= 0 else math.pi + theta
            if dihedral > math.pi + self.tol.conv:
                out.append({"kind": "reflex-edge", "edge": [int(a), int(b)],
                            "dihedral": dihedral})
        try:
            hull = ConvexHull(v)
        except (QhullError, ValueError):
            return out + [{"kind": "flat-hull"}]
        offsets = v @ hull.equations[:, :3].T + hull.equations[:, 3]
        gap = offsets.max(axis=1)
        tol = 1e-9 * self.bbox_diag
        for i in np.flatnonzero(gap < -tol):
            out.append({"kind": "interior-vertex", "vertex": int(i), "depth": float(-gap[i])})
        return out

    # -- misc --------------------------------------------------------------
    def cached(self, key, factory):
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]

    def __repr__(self):
        return (f"TriSurface(V={len(self.vertices)}, E={len(self.edges)}, "
                f"F={len(self.faces)}, convex={self.convex})")


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def build_box(a, b, c, tolerances: Tolerances = DEFAULT_TOLERANCES) -> TriSurface:
    """Axis-aligned box centred at the origin with edge lengths a, b, c.

    Each quad is split along the diagonal that starts at its
    lexicographically smallest vertex.
    """
    dims = (a, b, c)
    if any(not (d > 0) for d in dims):
        raise InvalidArgument(f"box dimensions must be positive, got {dims}")
    half = [0.5 * d for d in dims]
    verts = [tuple(s * h for s, h in zip(signs, half))
             for signs in itertools.product((-1.0, 1.0), repeat=3)]
    index = {vv: i for i, vv in enumerate(verts)}
    faces = []
    for axis in range(3):
        u, w = [k for k in range(3) if k != axis]
        for sign in (-1.0, 1.0):
            ring = []
            for su, sw in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
                p = [0.0, 0.0, 0.0]
                p[axis] = sign * half[axis]
                p[u] = su * half[u]
                p[w] = sw * half[w]
                ring.append(index[tuple(p)])
            pts = np.array([verts[i] for i in ring])
            normal = np.cross(pts[1] - pts[0], pts[2] - pts[0])
            if normal[axis] * sign < 0:
                ring.reverse()
            start = min(range(4), key=lambda i: verts[ring[i]])
            ring = ring[start:] + ring[:start]
            faces.append((ring[0], ring[1], ring[2]))
            faces.append((ring[0], ring[2], ring[3]))
    return TriSurface(verts, faces, center=(0.0, 0.0, 0.0), convex=True, tolerances=tolerances)


def build_symmetric_hull(n=None, shape=(1.0, 1.0, 1.0), seed=0, points=None,
                         tolerances: Tolerances = DEFAULT_TOLERANCES) -> TriSurface:
    """Convex hull of P and -P, a centrally symmetric convex polyhedron.

    ``P`` is either ``points`` (explicit mode) or ``n`` points drawn
    uniformly on the unit sphere with ``numpy.random.default_rng(seed)``
    (PCG64: normalised standard normals) and then scaled by the ellipsoid
    semi-axes ``shape``.
    """
    if points is None:
        if n is None or n < 4:
            raise InvalidArgument("need n >= 4 sample points")
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((int(n), 3))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        pts = g * np.asarray(shape, dtype=float)
    else:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
    cloud = np.vstack([pts, -pts])
    if np.linalg.matrix_rank(cloud, tol=1e-12 * max(1.0, np.abs(cloud).max())) < 3:
        raise DegenerateInput("symmetric point set is coplanar")
    try:
        hull = ConvexHull(cloud)
    except QhullError as exc:
        raise DegenerateInput(f"convex hull failed: {exc}") from None
    keep = np.array(sorted(set(hull.simplices.ravel().tolist())))
    # drop duplicated mirror points (x == -x only at the origin, but explicit
    # inputs may already contain both signs)
    remap = {}
    uniq = []
    for old in keep.tolist():
        p = tuple(np.round(cloud[old], 14))
        if p not in remap:
            remap[p] = len(uniq)
            uniq.append(cloud[old])
    index = {old: remap[tuple(np.round(cloud[old], 14))] for old in keep.tolist()}
    faces = []
    for simplex, eq in zip(hull.simplices, hull.equations):
        tri = [index[int(i)] for i in simplex]
        if len(set(tri)) < 3:
            continue
        pa, pb, pc = (np.asarray(uniq[i]) for i in tri)
        if np.cross(pb - pa, pc - pa) @ eq[:3] < 0:
            tri = [tri[0], tri[2], tri[1]]
        faces.append(tri)
    return TriSurface(np.array(uniq), faces, center=(0.0, 0.0, 0.0), convex=True,
                      tolerances=tolerances)


# ---------------------------------------------------------------------------
# validation and point location
# ---------------------------------------------------------------------------

def validate_sphere_topology(s: TriSurface) -> ValidationReport:
    nonmanifold = [[int(a), int(b)] for (a, b), fs in zip(s.edges, s.edge_faces) if len(fs) != 2]
    degenerate = [int(i) for i in np.flatnonzero(s.face_areas <= s.eps_deg)]
    orient = []
    for e, fs in enumerate(s.edge_faces):
        if len(fs) != 2:
            continue
        a, b = (int(x) for x in s.edges[e])
        dirs = []
        for f in fs:
            tri = s.faces[f].tolist()
            i = tri.index(a)
            dirs.append(tri[(i + 1) % 3] == b)
        if dirs[0] == dirs[1]:
            orient.append([a, b])
    convexity = s.convexity_violations() if s.convex else []
    chi = s.euler_characteristic
    passed = not (nonmanifold or degenerate or orient or convexity) and chi == 2
    return ValidationReport(passed=passed, euler_characteristic=int(chi),
                            vertices=len(s.vertices), edges=len(s.edges), faces=len(s.faces),
                            nonmanifold_edges=nonmanifold, degenerate_faces=degenerate,
                            orientation_violations=orient, convexity_violations=convexity)


def closest_points_on_triangles(p, a, b, c):
    """Closest point to ``p`` on each triangle (a[i], b[i], c[i]).

    Returns the points (N, 3) and their barycentric weights (N, 3).
    """
    p = np.asarray(p, dtype=float)
    ab, ac, ap = b - a, c - a, p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    n = len(a)
    bary = np.zeros((n, 3))
    done = np.zeros(n, dtype=bool)

    def put(mask, w):
        nonlocal done
        m = mask & ~done
        bary[m] = w[m]
        done |= m

    one = np.ones(n)
    zero = np.zeros(n)
    put((d1 <= 0) & (d2 <= 0), np.stack([one, zero, zero], 1))
    put((d3 >= 0) & (d4 <= d3), np.stack([zero, one, zero], 1))
    with np.errstate(invalid="ignore", divide="ignore"):
        t = d1 / (d1 - d3)
        put((vc <= 0) & (d1 >= 0) & (d3 <= 0), np.stack([1 - t, t, zero], 1))
        put((d6 >= 0) & (d5 <= d6), np.stack([zero, zero, one], 1))
        t = d2 / (d2 - d6)
        put((vb <= 0) & (d2 >= 0) & (d6 <= 0), np.stack([1 - t, zero, t], 1))
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        put((va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0), np.stack([zero, 1 - t, t], 1))
        denom = va + vb + vc
        v_ = vb / denom
        w_ = vc / denom
        put(np.ones(n, dtype=bool), np.stack([1 - v_ - w_, v_, w_], 1))
    pts = bary[:, :1] * a + bary[:, 1:2] * b + bary[:, 2:] * c
    return pts, bary


def locate_point(s: TriSurface, p, eps) -> SurfacePoint:
    """Canonical surface point nearest to the 3D point ``p``.

    Raises :class:`OffSurface` if that point is farther than ``eps``.
    """
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    tri = s.vertices[s.faces]
    pts, bary = closest_points_on_triangles(p, tri[:, 0], tri[:, 1], tri[:, 2])
    dist = np.linalg.norm(pts - np.asarray(p, dtype=float), axis=1)
    f = int(np.argmin(dist))
    if dist[f] > eps:
        raise OffSurface(f"point {list(map(float, p))} is {dist[f]:.3g} from the surface (eps={eps:.3g})")
    return s.canonical(f, bary[f])


# ---------------------------------------------------------------------------
# OBJ input/output
# ---------------------------------------------------------------------------

def parse_obj(text, center=None, tolerances: Tolerances = DEFAULT_TOLERANCES) -> TriSurface:
    """Parse OBJ text with ``v`` and triangular ``f`` records (1-based)."""
    verts, faces = [], []
    for lineno, line in enumerate(io.StringIO(text), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag = parts[0]
        if tag == "v":
            try:
                verts.append([float(x) for x in parts[1:4]])
            except ValueError:
                raise MeshFormatError(f"line {lineno}: bad vertex record") from None
            if len(verts[-1]) != 3:
                raise MeshFormatError(f"line {lineno}: vertex needs 3 coordinates")
        elif tag == "f":
            idx = []
            for tok in parts[1:]:
                try:
                    k = int(tok.split("/")[0])
                except ValueError:
                    raise MeshFormatError(f"line {lineno}: bad face index {tok!r}") from None
                idx.append(k - 1 if k > 0 else len(verts) + k)
            if len(idx) != 3:
                raise MeshFormatError(f"line {lineno}: non-triangular face ({len(idx)} vertices)")
            if any(i < 0 or i >= len(verts) for i in idx):
                raise MeshFormatError(f"line {lineno}: face index out of range")
            faces.append(idx)
    if not verts or not faces:
        raise MeshFormatError("OBJ contains no triangles")
    return TriSurface(verts, faces, center=center, tolerances=tolerances)


def read_obj(path, center=None, tolerances: Tolerances = DEFAULT_TOLERANCES) -> TriSurface:
    return parse_obj(Path(path).read_text(), center=center, tolerances=tolerances)


def obj_text(s: TriSurface) -> str:
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in s.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in s.faces.tolist()]
    return "\n".join(lines) + "\n"


def write_obj(s: TriSurface, path):
    Path(path).write_text(obj_text(s))
