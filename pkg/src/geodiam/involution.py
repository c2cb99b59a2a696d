"""Involutive isometries: central symmetry and explicit vertex permutations."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import geodesic
from .errors import InvalidArgument, NotSymmetric, OffSurface, SymmetryViolation
from .surface import SurfacePoint, TriSurface, locate_point

CENTRAL = "central-symmetry"
PERMUTATION = "vertex-permutation"


class Involution:
    """A self-map ``I`` of a surface with ``I(I(p)) == p``.

    ``kind`` is either ``"central-symmetry"`` (``p -> 2c - p``) or
    ``"vertex-permutation"`` (faces mapped through ``perm``, barycentric
    weights carried over). Construct through :func:`central_symmetry` or
    :func:`vertex_permutation`.
    """

    def __init__(self, kind, host: TriSurface, perm, center=None):
        self.kind = kind
        self.host = host
        self.perm = np.asarray(perm, dtype=np.int64)
        self.center = None if center is None else np.asarray(center, dtype=float)
        faces = {tuple(sorted(f)): i for i, f in enumerate(host.faces.tolist())}
        self._face_map = {}
        for i, f in enumerate(host.faces.tolist()):
            img = tuple(sorted(int(self.perm[v]) for v in f))
            if img in faces:
                self._face_map[i] = faces[img]

    def __repr__(self):
        return f"Involution(kind={self.kind!r}, host={self.host!r})"

    def apply(self, p: SurfacePoint) -> SurfacePoint:
        s = self.host
        g = self._face_map.get(p.face)
        if g is not None:
            weights = {int(self.perm[v]): w for v, w in zip(s.faces[p.face].tolist(), p.bary)}
            bary = [weights[v] for v in s.faces[g].tolist()]
            return s.canonical(g, bary)
        if self.kind == CENTRAL:
            target = 2.0 * self.center - s.embed(p)
        else:
            tri = s.faces[p.face].tolist()
            target = np.asarray(p.bary) @ s.vertices[self.perm[tri]]
        try:
            return locate_point(s, target, max(s.eps_pt, 1e-300))
        except OffSurface as exc:
            raise SymmetryViolation(f"image of {p} is off the surface: {exc}") from None

    __call__ = apply

    def image_point(self, x):
        """Image of a 3D point (central symmetry only)."""
        if self.kind != CENTRAL:
            raise InvalidArgument("3D images are defined for central symmetry only")
        return 2.0 * self.center - np.asarray(x, dtype=float)

    def has_combinatorial_fixed_point(self):
        """True if some vertex, edge or face is mapped onto itself.

        A face or edge carried onto itself by a permutation-induced affine
        map keeps its centroid fixed, so any of these implies a fixed point.
        """
        s = self.host
        if self.kind == CENTRAL:
            try:
                locate_point(s, self.center, max(s.eps_pt, 1e-300))
                return True
            except OffSurface:
                return False
        if (self.perm == np.arange(len(self.perm))).any():
            return True
        for a, b in s.edges.tolist():
            if {int(self.perm[a]), int(self.perm[b])} == {a, b}:
                return True
        return any(f == g for f, g in self._face_map.items())

    def to_dict(self):
        d = {"kind": self.kind, "involution": self.perm.tolist()}
        if self.center is not None:
            d["center"] = self.center.tolist()
        return d


def central_symmetry(s: TriSurface) -> Involution:
    """The map ``p -> 2c - p`` about the surface's declared center."""
    if s.center is None:
        raise NotSymmetric("surface has no declared center")
    mirrored = 2.0 * s.center - s.vertices
    dist, idx = cKDTree(s.vertices).query(mirrored)
    if (dist > s.eps_pt).any():
        worst = int(np.argmax(dist))
        raise NotSymmetric(f"vertex {worst} has no mirror image (gap {dist[worst]:.3g})")
    return Involution(CENTRAL, s, idx, center=s.center)


def vertex_permutation(s: TriSurface, perm) -> Involution:
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (len(s.vertices),):
        raise InvalidArgument("permutation length must equal the vertex count")
    if sorted(perm.tolist()) != list(range(len(perm))):
        raise InvalidArgument("not a permutation")
    if (perm[perm] != np.arange(len(perm))).any():
        raise InvalidArgument("permutation is not involutive")
    return Involution(PERMUTATION, s, perm)


def read_permutation(s: TriSurface, path) -> Involution:
    data = json.loads(Path(path).read_text())
    perm = data["involution"] if isinstance(data, dict) else data
    return vertex_permutation(s, perm)


@dataclass
class InvolutionReport:
    kind: str
    nsamples: int
    npairs: int
    involutivity_defect: float
    isometry_defect: float
    min_antipodal_distance: float
    min_antipodal_chord: float
    fixed_point_free: bool
    involutive: bool
    isometric: bool

    def to_dict(self):
        return asdict(self)


def sample_points(s: TriSurface, n, rng):
    """``n`` area-weighted uniform points on ``s``."""
    prob = s.face_areas / s.face_areas.sum()
    faces = rng.choice(len(s.faces), size=n, p=prob)
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    bary = np.stack([1 - r1, r1 * (1 - r2), r1 * r2], axis=1)
    return [s.canonical(int(f), b) for f, b in zip(faces, bary)]


def check_involution(inv: Involution, nsamples=100, seed=0, npairs=None, nfixed=None) -> InvolutionReport:
    """Statistical check of involutivity, isometry and fixed-point-freeness.

    ``npairs`` random pairs (default ``min(nsamples, 200)``) are used for the
    geodesic isometry defect and ``nfixed`` samples (default
    ``min(nsamples, 50)``) for the minimal geodesic distance to the image.
    Vertices and edge midpoints are always scanned for exact fixed points.
    """
    if nsamples < 1:
        raise InvalidArgument("nsamples must be >= 1")
    s = inv.host
    rng = np.random.default_rng(seed)
    pts = sample_points(s, nsamples, rng)
    inv_defect = 0.0
    chord_min = np.inf
    for p in pts:
        q = inv.apply(p)
        back = inv.apply(q)
        inv_defect = max(inv_defect, float(np.linalg.norm(s.embed(back) - s.embed(p))))
        chord_min = min(chord_min, float(np.linalg.norm(s.embed(q) - s.embed(p))))

    # vertices and edge midpoints catch fixed points that random samples miss
    lattice = [s.vertex_point(v) for v in range(len(s.vertices))]
    for e, (a, b) in enumerate(s.edges.tolist()):
        f = s.edge_faces[e][0]
        tri = s.faces[f].tolist()
        bary = [0.0, 0.0, 0.0]
        bary[tri.index(a)] = bary[tri.index(b)] = 0.5
        lattice.append(s.canonical(f, bary))
    for p in lattice:
        chord_min = min(chord_min, float(np.linalg.norm(s.embed(inv.apply(p)) - s.embed(p))))

    npairs = min(nsamples, 200) if npairs is None else npairs
    nfixed = min(nsamples, 50) if nfixed is None else nfixed
    iso = 0.0
    geodesic_ok = s.convex
    if geodesic_ok and npairs:
        idx = rng.integers(0, len(pts), size=(npairs, 2))
        for i, j in idx:
            x, y = pts[i], pts[j]
            d1 = geodesic.distance(s, x, y)
            d2 = geodesic.distance(s, inv.apply(x), inv.apply(y))
            iso = max(iso, abs(d1 - d2))
    anti_min = np.inf
    if geodesic_ok:
        for p in pts[:nfixed]:
            anti_min = min(anti_min, geodesic.distance(s, p, inv.apply(p)))
    if inv.has_combinatorial_fixed_point():
        chord_min = 0.0
        anti_min = 0.0
    free = bool(chord_min > s.eps_pt and (anti_min > s.eps_pt or not geodesic_ok))
    return InvolutionReport(kind=inv.kind, nsamples=nsamples, npairs=int(npairs),
                            involutivity_defect=inv_defect, isometry_defect=iso,
                            min_antipodal_distance=float(anti_min),
                            min_antipodal_chord=float(chord_min),
                            fixed_point_free=free,
                            involutive=inv_defect <= s.eps_pt,
                            isometric=iso <= s.eps_iso)
