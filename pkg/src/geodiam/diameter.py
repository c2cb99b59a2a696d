"""Geodesic diameter search: all-pairs brute force and the antipodal reduction.

On a surface homeomorphic to a sphere with a fixed-point-free involutive
isometry ``I``, some maximizing pair has the form ``(x, I(x))``. The
antipodal search therefore maximizes the single-point objective
``rho(x, I(x))`` (n distance queries) instead of all n^2 pairs.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from . import geodesic
from .errors import InvalidArgument, InvolutionCheckFailed
from .involution import Involution, check_involution, sample_points
from .surface import SurfacePoint, TriSurface

FACE_UNIFORM = "face-uniform"
LATTICE = "lattice"
EXPLICIT = "explicit"

DEFAULT_SAMPLES = 500
DEFAULT_SEED = 42
DEFAULT_STEPS = 60
BRUTE_CAP = 2000
LOCAL_K = 8
HOP_PATIENCE = 24
HOP_SCALES = (1.0, 0.5, 0.25, 0.125)
HOP_TOP = 3
MAX_STARTS = 48
COARSE_FLOOR = 2.0 ** -10


@dataclass(frozen=True)
class Sampler:
    """Deterministic choice of candidate points.

    ``face-uniform`` draws ``count`` area-weighted points with
    ``numpy.random.default_rng(seed)``; ``lattice`` takes the vertices
    followed by the edge midpoints (truncated to ``count`` if given);
    ``explicit`` returns ``points`` unchanged.
    """

    strategy: str = FACE_UNIFORM
    count: int | None = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    points: tuple = ()

    def sample(self, s: TriSurface):
        if self.strategy == FACE_UNIFORM:
            if not self.count or self.count < 1:
                raise InvalidArgument("sampler count must be >= 1")
            return sample_points(s, self.count, np.random.default_rng(self.seed))
        if self.strategy == LATTICE:
            pts = lattice_points(s)
            return pts if self.count is None else pts[: self.count]
        if self.strategy == EXPLICIT:
            return list(self.points)
        raise InvalidArgument(f"unknown sampler strategy {self.strategy!r}")


def lattice_points(s: TriSurface):
    pts = [s.vertex_point(v) for v in range(len(s.vertices))]
    for e, (a, b) in enumerate(s.edges.tolist()):
        f = s.edge_faces[e][0]
        tri = s.faces[f].tolist()
        bary = [0.0, 0.0, 0.0]
        bary[tri.index(a)] = bary[tri.index(b)] = 0.5
        pts.append(s.canonical(f, bary))
    return pts


@dataclass
class DiameterReport:
    diameter: float
    pair: tuple
    antipodal: bool
    method: str
    samples: int
    refine_steps: int
    refinement_iterations: int = 0
    sampled_max: float = 0.0
    antipodal_gap: float | None = None
    graph_bound: float | None = None
    near_max: list = field(default_factory=list)
    elapsed: float = 0.0
    surface: TriSurface = field(default=None, repr=False, compare=False)

    def to_dict(self):
        s = self.surface
        return {
            "diameter": self.diameter,
            "pair": [s.embed(p).tolist() for p in self.pair],
            "antipodal": self.antipodal,
            "method": self.method,
            "samples": self.samples,
            "refine_steps": self.refine_steps,
            "refinement_iterations": self.refinement_iterations,
            "sampled_max": self.sampled_max,
            "antipodal_gap": self.antipodal_gap,
            "graph_bound": self.graph_bound,
            "near_max": [[s.embed(a).tolist(), s.embed(b).tolist()] for a, b in self.near_max],
            "elapsed": self.elapsed,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


# ---------------------------------------------------------------------------
# local refinement
# ---------------------------------------------------------------------------

def _pattern_search(s, objective, start, steps, radius, ndirs, seed, floor=0.0):
    rng = np.random.default_rng(seed)
    best = start
    fbest = objective(start)
    r = s.mean_edge_length / 4.0 if radius is None else float(radius)
    rounds = 0
    gain = 1e-15 * s.bbox_diag
    seen_vertices = set()
    evaluations = 1
    while rounds < steps and r >= max(s.eps_pt, floor) and evaluations < 200 * max(steps, 1):
        offset = rng.uniform(0.0, 2.0 * math.pi)
        cand, fcand = None, fbest
        for k in range(ndirs):
            q = geodesic.shoot(s, best, offset + 2.0 * math.pi * k / ndirs, r)
            fq = objective(q)
            evaluations += 1
            if fq > fcand + gain:
                cand, fcand = q, fq
        if cand is None:
            # corners are natural maximizers on polyhedra; try nearby ones
            here = s.embed(best)
            for f in s.faces_of(best):
                for v in s.faces[f].tolist():
                    if v in seen_vertices or np.linalg.norm(s.vertices[v] - here) > 2 * r:
                        continue
                    seen_vertices.add(v)
                    q = s.vertex_point(v)
                    fq = objective(q)
                    evaluations += 1
                    if fq > fcand + gain:
                        cand, fcand = q, fq
        if cand is None:
            r *= 0.5
            rounds += 1
        else:
            best, fbest = cand, fcand
    return best, fbest


def refine_local_max(s: TriSurface, objective, start: SurfacePoint, steps=DEFAULT_STEPS,
                     radius=None, ndirs=8, seed=0) -> SurfacePoint:
    """Derivative-free local maximization of ``objective`` on the surface.

    A stencil of ``ndirs`` geodesic steps of length ``r`` (randomly rotated
    every round) is evaluated around the current point; on failure the
    radius halves. Stops after ``steps`` halvings or once ``r`` drops below
    the point tolerance. The result never scores below ``start``.
    """
    return _pattern_search(s, objective, start, steps, radius, ndirs, seed)[0]


def _to_chart(s, g, face_from, face_to):
    """Re-express a chart gradient of ``face_from`` in the chart of ``face_to``."""
    if face_from == face_to:
        return np.asarray(g, dtype=float)
    return geodesic.chart_rotation(s, face_to, face_from).T @ np.asarray(g, dtype=float)


def _move(s, p, delta):
    n = float(np.hypot(*delta))
    if n == 0.0:
        return p
    return geodesic.shoot(s, p, math.atan2(delta[1], delta[0]), n)


def _polish(s, value_fn, model_fn, points, movable, delta0=None, iters=200):
    """Trust-region minimax ascent on a min-of-branches objective.

    ``model_fn(points, slack)`` returns ``(lengths, grads)`` for all nearly
    active branches, ``grads`` of shape (K, 2 * len(movable)) in the charts
    of the movable points. Each step solves the linear model
    ``max_d min_k lengths[k] + grads[k] @ d`` over a box of half-width
    ``delta`` and is accepted only if the true objective improves. Branch
    lengths are convex in the unfolding, so when the model predicts no
    ascent the point is stationary and the loop stops.
    """
    points = list(points)
    cur = value_fn(points)
    delta = s.mean_edge_length / 8.0 if delta0 is None else delta0
    tiny = 1e-14 * s.bbox_diag
    for _ in range(iters):
        if delta < s.eps_pt or not movable:
            break
        movable = [i for i in movable if s.point_vertex(points[i]) is None]
        if not movable:
            break
        slack = min(4.0 * len(movable) * delta, 0.05 * s.bbox_diag)
        lengths, grads = model_fn(points, movable, slack)
        if not len(lengths):
            break
        k, m = grads.shape
        c = np.zeros(m + 1)
        c[-1] = -1.0
        a_ub = np.hstack([-grads, np.ones((k, 1))])
        res = linprog(c, A_ub=a_ub, b_ub=np.asarray(lengths), method="highs",
                      bounds=[(-delta, delta)] * m + [(None, None)])
        if res.status != 0:
            delta *= 0.5
            continue
        predicted = res.x[-1] - cur
        if predicted <= tiny:
            break
        trial = list(points)
        for j, i in enumerate(movable):
            trial[i] = _move(s, points[i], res.x[2 * j: 2 * j + 2])
        new = value_fn(trial)
        if new > cur + tiny:
            if new - cur >= 0.75 * predicted:
                delta *= 2.0
            points, cur = trial, new
        else:
            delta *= 0.5
    return points, cur


def _branch_rows(s, brs, x, y, use_source, use_target, jac=None):
    lengths, rows = [], []
    for b in brs:
        row = []
        if use_source:
            row.extend(_to_chart(s, b.source_grad, b.source_face, x.face))
        if use_target:
            gt = _to_chart(s, b.target_grad, b.target_face, y.face)
            if jac is None:
                row.extend(gt)
            else:
                # target tied to the source through the involution
                row = list(np.asarray(row) + jac.T @ gt)
        lengths.append(b.length)
        rows.append(row)
    return np.asarray(lengths), np.asarray(rows, dtype=float)


def _involution_jacobian(s, inv, x):
    """Linear map from chart displacements at ``x`` to chart displacements at
    ``I(x)`` (the map is affine on each face)."""
    y = inv.apply(x)
    f = x.face
    cx = s.charts[f]
    imgs = [s.chart_xy(inv.apply(s.vertex_point(int(v))), y.face)
            if y.face in s.faces_of(inv.apply(s.vertex_point(int(v)))) else None
            for v in s.faces[f]]
    if any(i is None for i in imgs):
        return None
    mx = np.array([cx[1] - cx[0], cx[2] - cx[0]]).T
    my = np.array([imgs[1] - imgs[0], imgs[2] - imgs[0]]).T
    return my @ np.linalg.inv(mx)


def polish_pair(s, x, y, budget=None):
    """Joint minimax polish of ``rho(x, y)`` over both endpoints."""
    def value(pts):
        return geodesic.distance(s, pts[0], pts[1], budget=budget)

    def model(pts, movable, slack):
        brs = geodesic.branches(s, pts[0], pts[1], slack, budget=budget)
        return _branch_rows(s, brs, pts[0], pts[1], 0 in movable, 1 in movable)

    (x, y), val = _polish(s, value, model, [x, y], [0, 1])
    return x, y, val


def polish_antipodal(s, inv, x, budget=None):
    """Minimax polish of ``rho(x, I(x))``."""
    def value(pts):
        return geodesic.distance(s, pts[0], inv.apply(pts[0]), budget=budget)

    def model(pts, movable, slack):
        x = pts[0]
        y = inv.apply(x)
        if s.point_vertex(y) is not None:
            return np.zeros(0), np.zeros((0, 2))
        jac = _involution_jacobian(s, inv, x)
        if jac is None:
            return np.zeros(0), np.zeros((0, 2))
        brs = geodesic.branches(s, x, y, slack, budget=budget)
        return _branch_rows(s, brs, x, y, True, True, jac)

    (x,), val = _polish(s, value, model, [x], [0])
    return x, val


def polish_farthest(s, source, y, field=None, budget=None):
    """Minimax polish of ``rho(source, y)`` over ``y``."""
    def value(pts):
        if field is not None:
            return field.distance(pts[0])
        return geodesic.distance(s, source, pts[0], budget=budget)

    def model(pts, movable, slack):
        brs = geodesic.branches(s, source, pts[0], slack, budget=budget)
        return _branch_rows(s, brs, source, pts[0], False, True)

    (y,), val = _polish(s, value, model, [y], [0])
    return y, val


# ---------------------------------------------------------------------------
# diameter searches
# ---------------------------------------------------------------------------

def _hop(s, polish, points, val, radius, rng, patience=HOP_PATIENCE):
    """Basin hopping: jitter all ``points`` by up to ``radius`` and polish.

    Neighbouring local maxima can sit much closer together than the sample
    spacing, so a converged point is perturbed and re-polished until
    ``patience`` consecutive hops fail to improve it.
    """
    tiny = 1e-12 * s.bbox_diag
    fails = 0
    while fails < patience:
        r = radius * HOP_SCALES[fails % len(HOP_SCALES)]
        trial = [_move(s, p, rng.normal(size=2) * r) for p in points]
        trial, v = polish(trial)
        if v > val + tiny:
            points, val, fails = trial, v, 0
        else:
            fails += 1
    return points, val


def _pair_key(s, p, q):
    a, b = p.key(), q.key()
    return (a, b) if a <= b else (b, a)


def _gap(s, inv, p, q):
    if inv is None:
        return None
    return geodesic.distance(s, q, inv.apply(p))


def _graph_bound(s, p, q):
    try:
        return geodesic.graph_distance(s, p, q, 1)
    except Exception:  # pragma: no cover - diagnostics only
        return None


def local_max_indices(xyz, vals, k=LOCAL_K, mirror=None):
    """Indices of samples whose value is not beaten by any of their ``k``
    nearest neighbours (3D distance), best first.

    ``mirror`` optionally gives the embedded images of the samples under an
    involution; the cloud is then doubled with those images carrying the
    same values, the natural neighbourhood for an invariant objective.
    """
    xyz = np.asarray(xyz, dtype=float)
    vals = np.asarray(vals, dtype=float)
    n = len(xyz)
    if n == 0:
        return np.zeros(0, dtype=int)
    if mirror is not None:
        cloud, cvals = np.vstack([xyz, np.asarray(mirror, dtype=float)]), np.concatenate([vals, vals])
    else:
        cloud, cvals = xyz, vals
    kk = min(k + 1, len(cloud))
    _, nb = cKDTree(cloud).query(xyz, k=kk)
    nb = np.asarray(nb).reshape(n, kk)
    # ties go to the lower index so that plateaus still yield one start
    own = np.arange(n)
    beaten = (cvals[nb] > vals[:, None]) | ((cvals[nb] == vals[:, None]) & (nb % n < own[:, None]))
    keep = np.flatnonzero(~beaten.any(axis=1))
    return keep[np.argsort(-vals[keep], kind="stable")]


def _basin_radius(s, n):
    """Typical spacing of ``n`` uniform samples on ``s``."""
    return math.sqrt(s.area / max(n, 1))


def _distinct_best(s, results, radius, top=HOP_TOP):
    """The ``top`` best ``(x, y, value)`` results with pairwise distinct
    endpoints (either orientation, 3D distance above ``radius``)."""
    out = []
    for x, y, v in sorted(results, key=lambda r: -r[2]):
        X, Y = s.embed(x), s.embed(y)
        clash = False
        for a, b, _ in out:
            A, B = s.embed(a), s.embed(b)
            d = min(np.linalg.norm(X - A) + np.linalg.norm(Y - B),
                    np.linalg.norm(X - B) + np.linalg.norm(Y - A))
            if d < radius:
                clash = True
                break
        if not clash:
            out.append((x, y, v))
        if len(out) >= top:
            break
    return out


def _pair_starts(s, pts, dmat, max_starts, per_row=2):
    """Start pairs for refining the all-pairs search.

    First endpoints are samples whose eccentricity (largest sampled
    distance) beats their nearest neighbours; each is paired with the
    best ``per_row`` local maxima of its own distance row. Pairs are
    unordered and returned best first.
    """
    xyz = np.array([s.embed(p) for p in pts])
    ecc = dmat.max(axis=1)
    seen = {}
    for i in local_max_indices(xyz, ecc):
        for j in local_max_indices(xyz, dmat[i])[:per_row]:
            if i != j:
                key = (min(i, j), max(i, j))
                seen[key] = float(dmat[i, j])
    order = sorted(seen, key=lambda ij: (-seen[ij], ij))[:max_starts]
    return [(pts[i], pts[j], seen[(i, j)]) for i, j in order]


def _refine_pair(s, x, y, val, steps, budget, max_cycles):
    cycles = 0
    for cycles in range(1, max_cycles + 1):
        fx = geodesic.DistanceField(s, x, budget=budget)
        y, _ = _pattern_search(s, fx.distance, y, steps, None, 8, cycles)
        fy = geodesic.DistanceField(s, y, budget=budget)
        x, _ = _pattern_search(s, fy.distance, x, steps, None, 8, cycles + 1000)
        x, y, vx = polish_pair(s, x, y, budget=budget)
        improved = vx > val + 1e-12 * s.bbox_diag
        val = max(val, vx)
        if not improved:
            break
    return x, y, val, cycles


def brute_force_diameter(s: TriSurface, sampler: Sampler | None = None, refine=True,
                         steps=DEFAULT_STEPS, involution: Involution | None = None,
                         cap=BRUTE_CAP, budget=None, max_cycles=10,
                         max_starts=MAX_STARTS) -> DiameterReport:
    """Maximum exact distance over all sample pairs, optionally refined.

    Refinement alternates farthest-point searches on the two endpoints,
    followed by a joint polish of both. The pair objective has many local
    maxima, so every locally maximal sample pair (up to ``max_starts``) is
    refined. If ``involution`` is given it is only used to report whether
    the final pair is antipodal.
    """
    t0 = time.perf_counter()
    sampler = sampler or Sampler()
    pts = sampler.sample(s)
    n = len(pts)
    if n == 0:
        raise InvalidArgument("sampler produced no points")
    if n > cap:
        raise InvalidArgument(f"brute force is capped at {cap} samples, got {n}")
    tie = 1e-12 * s.bbox_diag
    dmat = np.zeros((n, n))
    for i in range(n - 1):
        fld = geodesic.DistanceField(s, pts[i], budget=budget)
        for j in range(i + 1, n):
            dmat[i, j] = dmat[j, i] = fld.distance(pts[j])
    dmax = float(dmat.max())
    cands = [(i, j) for i, j in zip(*np.nonzero(dmat >= dmax - tie)) if i < j]
    if cands:
        i, j = min(cands, key=lambda ij: _pair_key(s, pts[ij[0]], pts[ij[1]]))
    else:
        i = j = 0
    near = [(pts[a], pts[b]) for a, b in zip(*np.nonzero(dmat >= dmax - s.eps_match)) if a < b]
    x, y = pts[i], pts[j]
    cycles = 0
    if refine and n > 1 and dmax > 0:
        results = []
        for xa, ya, va in _pair_starts(s, pts, dmat, max_starts):
            xa, ya, va, ca = _refine_pair(s, xa, ya, va, steps, budget, max_cycles)
            cycles += ca
            results.append((xa, ya, va))

        def polish(pq):
            a, b, v = polish_pair(s, pq[0], pq[1], budget=budget)
            return [a, b], v

        rng = np.random.default_rng(sampler.seed)
        best_val = -1.0
        for xa, ya, va in _distinct_best(s, results, _basin_radius(s, n)):
            (xa, ya), va = _hop(s, polish, [xa, ya], va, _basin_radius(s, n), rng)
            if va > best_val + 1e-12 * s.bbox_diag:
                x, y, best_val = xa, ya, va
    diam = geodesic.distance(s, x, y, budget=budget) if n > 1 else 0.0
    gap = _gap(s, involution, x, y)
    return DiameterReport(diameter=diam, pair=(x, y),
                          antipodal=bool(gap is not None and gap <= s.eps_pt),
                          method="brute", samples=n, refine_steps=steps if refine else 0,
                          refinement_iterations=cycles, sampled_max=dmax, antipodal_gap=gap,
                          graph_bound=_graph_bound(s, x, y) if n > 1 else 0.0,
                          near_max=near, elapsed=time.perf_counter() - t0, surface=s)


def antipodal_objective(s: TriSurface, inv: Involution, budget=None):
    def f(p):
        return geodesic.distance(s, p, inv.apply(p), budget=budget)
    return f


def require_fixed_point_free(inv: Involution, seed=0):
    rep = check_involution(inv, nsamples=64, seed=seed, npairs=0, nfixed=0)
    if not rep.involutive:
        raise InvolutionCheckFailed(f"map is not involutive (defect {rep.involutivity_defect:.3g})")
    if not rep.fixed_point_free:
        raise InvolutionCheckFailed("involution has a fixed point")
    return rep


def antipodal_diameter(s: TriSurface, inv: Involution, sampler: Sampler | None = None,
                       refine=True, steps=DEFAULT_STEPS, budget=None,
                       max_starts=MAX_STARTS) -> DiameterReport:
    """Maximize ``rho(x, I(x))`` over the samples, optionally refined.

    The objective has many local maxima of nearly equal height, so
    refinement (pattern search, then a minimax polish) starts from every
    sample that beats its nearest neighbours, up to ``max_starts``.
    """
    t0 = time.perf_counter()
    require_fixed_point_free(inv)
    sampler = sampler or Sampler()
    pts = sampler.sample(s)
    if not pts:
        raise InvalidArgument("sampler produced no points")
    f = antipodal_objective(s, inv, budget)
    vals = np.array([f(p) for p in pts])
    fmax = float(vals.max())
    tie = 1e-12 * s.bbox_diag
    best = min((pts[i] for i in np.flatnonzero(vals >= fmax - tie)), key=lambda p: p.key())
    near = [(pts[i], inv.apply(pts[i])) for i in np.flatnonzero(vals >= fmax - s.eps_match)]
    x = best
    chosen = []
    if refine:
        xyz = np.array([s.embed(p) for p in pts])
        img = np.array([s.embed(inv.apply(p)) for p in pts])
        chosen = [pts[int(i)] for i in local_max_indices(xyz, vals, mirror=img)[:max_starts]]
        results = []
        for p in chosen:
            # the polish converges locally, so the stencil only needs to find the basin
            xa, _ = _pattern_search(s, f, p, steps, None, 8, 0, s.mean_edge_length * COARSE_FLOOR)
            xa, va = polish_antipodal(s, inv, xa, budget=budget)
            results.append((xa, inv.apply(xa), va))

        def polish(pts_):
            a, v = polish_antipodal(s, inv, pts_[0], budget=budget)
            return [a], v

        rng = np.random.default_rng(sampler.seed)
        best_val = -1.0
        for xa, _, va in _distinct_best(s, results, _basin_radius(s, len(pts))):
            (xa,), va = _hop(s, polish, [xa], va, _basin_radius(s, len(pts)), rng)
            if va > best_val + 1e-12 * s.bbox_diag:
                x, best_val = xa, va
    y = inv.apply(x)
    diam = geodesic.distance(s, x, y, budget=budget)
    return DiameterReport(diameter=diam, pair=(x, y), antipodal=True, method="antipodal",
                          samples=len(pts), refine_steps=steps if refine else 0,
                          refinement_iterations=len(chosen) if refine else 0, sampled_max=fmax,
                          antipodal_gap=0.0, graph_bound=_graph_bound(s, x, y),
                          near_max=near, elapsed=time.perf_counter() - t0, surface=s)


def farthest_point(s: TriSurface, source: SurfacePoint, sampler: Sampler | None = None,
                   refine=True, steps=DEFAULT_STEPS, budget=None):
    """Point of (locally refined) maximal distance from ``source``.

    Returns ``(point, distance)``.
    """
    sampler = sampler or Sampler()
    pts = sampler.sample(s)
    if not pts:
        raise InvalidArgument("sampler produced no points")
    fld = geodesic.DistanceField(s, source, budget=budget)
    vals = np.array([fld.distance(p) for p in pts])
    vmax = float(vals.max())
    tie = 1e-12 * s.bbox_diag
    best = min((pts[i] for i in np.flatnonzero(vals >= vmax - tie)), key=lambda p: p.key())
    if refine and vmax > 0:
        best, vmax = _pattern_search(s, fld.distance, best, steps, None, 8, 0)
        best, vmax = polish_farthest(s, source, best, field=fld, budget=budget)
    return best, float(vmax)
