import json
import math

import numpy as np
import pytest

from geodiam.diameter import (EXPLICIT, LATTICE, Sampler, antipodal_diameter,
                              brute_force_diameter, farthest_point,
                              local_max_indices, refine_local_max)
from geodiam.errors import InvalidArgument, InvolutionCheckFailed
from geodiam.geodesic import distance
from geodiam.involution import central_symmetry, vertex_permutation
from geodiam.surface import build_box, locate_point

SQRT5 = math.sqrt(5.0)
SQRT6 = math.sqrt(6.0)
# refined value on the 1x1x2 box; both methods land on it (derived by cross-method runs)
BOX112_DIAMETER = 3.0119423583004523
# farthest point from the vertex (1/2, 1/2, 2) of the 1x1x4 box (dense oracle sampling)
BOX114_FARTHEST = np.array([-0.125, -0.125, -2.0])
BOX114_FARTHEST_DIST = math.sqrt(697 / 32)


def at(s, xyz):
    return locate_point(s, np.asarray(xyz, dtype=float), 1e-9)


@pytest.fixture(scope="module")
def box112():
    s = build_box(1, 1, 2)
    return s, central_symmetry(s)


# -- sampler ---------------------------------------------------------------

def test_lattice_has_vertices_and_edge_midpoints(cube):
    pts = Sampler(LATTICE, None).sample(cube)
    assert len(pts) == len(cube.vertices) + len(cube.edges) == 26
    xyz = np.array([cube.embed(p) for p in pts])
    # face centres of the cube are midpoints of the triangulation diagonals
    assert np.isclose(np.abs(xyz).sum(axis=1), 0.5).sum() == 6
    assert len(Sampler(LATTICE, 5).sample(cube)) == 5


def test_face_uniform_is_deterministic(hull7):
    a = [p.key() for p in Sampler(count=30, seed=3).sample(hull7)]
    b = [p.key() for p in Sampler(count=30, seed=3).sample(hull7)]
    c = [p.key() for p in Sampler(count=30, seed=4).sample(hull7)]
    assert a == b and a != c


@pytest.mark.parametrize("sampler", [Sampler(count=0), Sampler("spiral")])
def test_bad_sampler(cube, sampler):
    with pytest.raises(InvalidArgument):
        sampler.sample(cube)


def test_local_max_indices_on_a_line():
    xyz = np.c_[np.arange(7.0), np.zeros(7), np.zeros(7)]
    vals = np.array([0, 3, 1, 0, 2, 5, 4], dtype=float)
    assert local_max_indices(xyz, vals, k=2).tolist() == [5, 1]


# -- brute force -----------------------------------------------------------

def test_brute_lattice_contains_opposite_vertices(cube):
    rep = brute_force_diameter(cube, Sampler(LATTICE, None), refine=False)
    assert rep.samples == 26
    assert rep.diameter >= SQRT5 - 1e-12
    assert rep.sampled_max == pytest.approx(SQRT5, abs=1e-12)
    assert len(rep.near_max) >= 4  # all four diagonals tie


def test_brute_single_sample_is_degenerate(cube):
    rep = brute_force_diameter(cube, Sampler(count=1))
    assert rep.diameter == 0.0
    assert rep.pair[0] == rep.pair[1]


def test_brute_rejects_oversized_sample(cube):
    with pytest.raises(InvalidArgument):
        brute_force_diameter(cube, Sampler(count=20), cap=10)


def test_methods_agree_on_box112(box112):
    s, inv = box112
    sampler = Sampler(count=200)
    brute = brute_force_diameter(s, sampler, involution=inv)
    anti = antipodal_diameter(s, inv, sampler)
    assert brute.diameter == pytest.approx(anti.diameter, abs=1e-6)
    assert anti.diameter == pytest.approx(BOX112_DIAMETER, abs=1e-9)
    # the brute-force maximizer is itself (close to) an antipodal pair
    x, y = brute.pair
    assert distance(s, y, inv.apply(x)) <= 1e-6 * s.bbox_diag
    assert brute.antipodal


# -- antipodal -------------------------------------------------------------

def test_octahedron_antipodal_matches_brute(octahedron):
    inv = central_symmetry(octahedron)
    anti = antipodal_diameter(octahedron, inv, Sampler(LATTICE, None))
    brute = brute_force_diameter(octahedron, Sampler(LATTICE, None), involution=inv)
    assert anti.method == "antipodal" and anti.antipodal
    assert anti.diameter == pytest.approx(SQRT6, abs=1e-12)
    assert brute.diameter == pytest.approx(anti.diameter, abs=1e-9)
    e1, m1 = at(octahedron, [1, 0, 0]), at(octahedron, [-1, 0, 0])
    assert distance(octahedron, e1, m1) == pytest.approx(anti.diameter, abs=1e-12)


def test_cube_antipodal_reaches_opposite_vertices(cube, cube_inv):
    rep = antipodal_diameter(cube, cube_inv, Sampler(count=60))
    assert rep.diameter >= SQRT5 - 1e-9
    assert rep.diameter == pytest.approx(distance(cube, *rep.pair), abs=1e-12)
    x, y = rep.pair
    assert cube.points_equal(y, cube_inv.apply(x))


def test_antipodal_rejects_map_with_fixed_points(cube):
    identity = vertex_permutation(cube, np.arange(len(cube.vertices)))
    with pytest.raises(InvolutionCheckFailed):
        antipodal_diameter(cube, identity, Sampler(count=5))


def test_refinement_never_lowers_the_sampled_max(hull7):
    inv = central_symmetry(hull7)
    sampler = Sampler(count=40, seed=5)
    raw = antipodal_diameter(hull7, inv, sampler, refine=False)
    ref = antipodal_diameter(hull7, inv, sampler, refine=True, steps=20)
    assert raw.diameter == pytest.approx(raw.sampled_max, abs=1e-12)
    assert ref.diameter >= raw.diameter - 1e-12


def test_reports_are_deterministic(cube, cube_inv):
    def run():
        d = antipodal_diameter(cube, cube_inv, Sampler(count=30, seed=9), steps=15).to_dict()
        d.pop("elapsed")
        return d
    assert run() == run()


def test_report_json(cube, cube_inv, check_schema):
    rep = brute_force_diameter(cube, Sampler(LATTICE, None), refine=False, involution=cube_inv)
    doc = check_schema("diameter_report", json.loads(rep.to_json()))
    assert doc["method"] == "brute" and doc["antipodal"] is True
    assert np.allclose(np.abs(doc["pair"]), 0.5)


# -- farthest point --------------------------------------------------------

def test_farthest_from_cube_vertex(cube):
    v = cube.vertex_point(0)
    p, d = farthest_point(cube, v, Sampler(LATTICE, None))
    assert d >= SQRT5 - 1e-12
    assert d == pytest.approx(distance(cube, v, p), abs=1e-12)


def test_farthest_with_only_the_source(cube):
    src = at(cube, [0.5, 0.1, 0.2])
    p, d = farthest_point(cube, src, Sampler(EXPLICIT, points=(src,)))
    assert d == 0.0 and p == src


def test_farthest_is_not_the_opposite_vertex_on_long_box():
    s = build_box(1, 1, 4)
    v = at(s, [0.5, 0.5, 2.0])
    p, d = farthest_point(s, v, Sampler(count=300))
    opposite = distance(s, v, at(s, [-0.5, -0.5, -2.0]))
    assert d > opposite + 0.1
    assert d == pytest.approx(BOX114_FARTHEST_DIST, abs=1e-7)
    np.testing.assert_allclose(s.embed(p), BOX114_FARTHEST, atol=1e-6)


# -- refine_local_max ------------------------------------------------------

def _bowl(s, centre):
    c = s.embed(centre)
    return lambda p: -float(np.sum((s.embed(p) - c) ** 2))


def test_refine_finds_interior_maximum(cube):
    target = at(cube, [0.5, 0.1, 0.2])
    f = _bowl(cube, target)
    start = at(cube, [0.5, 0.2, 0.05])
    got = refine_local_max(cube, f, start, steps=60)
    assert np.linalg.norm(cube.embed(got) - cube.embed(target)) < 1e-6
    assert f(got) >= f(start)


def test_refine_keeps_a_stable_start(cube):
    target = at(cube, [0.5, 0.1, 0.2])
    got = refine_local_max(cube, _bowl(cube, target), target, steps=30)
    assert cube.points_equal(got, target)


def test_refine_constant_objective_returns_start(cube):
    start = at(cube, [0.1, -0.5, 0.3])
    assert refine_local_max(cube, lambda p: 1.0, start, steps=60) == start


def test_refine_crosses_into_neighbouring_faces(cube):
    # maximum on the top face, start on the side face next to it
    target = at(cube, [0.3, 0.1, 0.5])
    start = at(cube, [0.5, 0.1, 0.4])
    got = refine_local_max(cube, _bowl(cube, target), start, steps=60)
    assert np.linalg.norm(cube.embed(got) - cube.embed(target)) < 1e-6

