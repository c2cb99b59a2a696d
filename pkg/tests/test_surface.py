import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geodiam.config import DEFAULT_TOLERANCES
from geodiam.errors import DegenerateInput, InvalidArgument, MeshFormatError, OffSurface
from geodiam.surface import (TriSurface, build_box, build_symmetric_hull, locate_point,
                             obj_text, parse_obj, validate_sphere_topology)


def test_cube_combinatorics(cube):
    assert (len(cube.vertices), len(cube.edges), len(cube.faces)) == (8, 18, 12)
    rep = validate_sphere_topology(cube)
    assert rep.passed and rep.euler_characteristic == 2
    assert cube.convex
    np.testing.assert_allclose(cube.center, 0.0)


def test_box_rejects_nonpositive_dimension():
    with pytest.raises(InvalidArgument):
        build_box(1, 1, -1)


def test_box_area():
    assert build_box(30, 12, 12).area == pytest.approx(1728.0, rel=1e-14)


def test_box_axes_and_centering():
    s = build_box(1, 2, 4)
    np.testing.assert_allclose(s.vertices.max(axis=0), [0.5, 1.0, 2.0])
    np.testing.assert_allclose(s.vertices.min(axis=0), [-0.5, -1.0, -2.0])


def test_octahedron_from_explicit_points(octahedron):
    assert len(octahedron.vertices) == 6 and len(octahedron.faces) == 8
    assert validate_sphere_topology(octahedron).passed


def test_hull_is_valid_and_symmetric(hull7):
    assert validate_sphere_topology(hull7).passed
    assert hull7.convex
    v = hull7.vertices
    d = np.linalg.norm(v[:, None, :] + v[None, :, :], axis=2).min(axis=1)
    assert d.max() <= hull7.eps_pt


def test_hull_is_deterministic():
    a = build_symmetric_hull(30, (1.0, 2.0, 0.5), seed=11)
    b = build_symmetric_hull(30, (1.0, 2.0, 0.5), seed=11)
    np.testing.assert_array_equal(a.vertices, b.vertices)
    np.testing.assert_array_equal(a.faces, b.faces)


def test_hull_coplanar_points_rejected():
    pts = [(1, 0, 0), (0, 1, 0), (1, 1, 0), (2, 3, 0)]
    with pytest.raises(DegenerateInput):
        build_symmetric_hull(points=pts)


def test_hull_needs_four_points():
    with pytest.raises(InvalidArgument):
        build_symmetric_hull(3, seed=0)


def test_validate_open_cube(cube):
    open_cube = TriSurface(cube.vertices, cube.faces[1:])
    rep = validate_sphere_topology(open_cube)
    assert not rep.passed
    assert len(rep.nonmanifold_edges) == 3


def test_validate_two_cubes(cube):
    v = np.vstack([cube.vertices, cube.vertices + 5.0])
    f = np.vstack([cube.faces, cube.faces + 8])
    rep = validate_sphere_topology(TriSurface(v, f))
    assert not rep.passed
    assert rep.euler_characteristic == 4


def test_locate_face_point(cube):
    p = locate_point(cube, (0.0, 0.0, 0.5001), 1e-3)
    np.testing.assert_allclose(cube.embed(p), [0.0, 0.0, 0.5], atol=1e-12)
    assert np.isclose(cube.face_normals[p.face] @ [0, 0, 1], 1.0)


def test_locate_off_surface(cube):
    with pytest.raises(OffSurface):
        locate_point(cube, (2.0, 0.0, 0.0), 1e-3)


def test_locate_edge_point_uses_smallest_face(cube):
    x = np.array([0.5, 0.0, 0.5])
    p = locate_point(cube, x, 1e-9)
    faces = cube.faces_of(p)
    assert len(faces) == 2 and p.face == min(faces)


def test_locate_vertex_uses_smallest_face(cube):
    p = locate_point(cube, (0.5, 0.5, 0.5), 1e-9)
    v = cube.point_vertex(p)
    assert v is not None
    assert p.face == min(cube.vertex_faces[v])


def test_obj_round_trip(hull7):
    s = parse_obj(obj_text(hull7), center=(0, 0, 0))
    np.testing.assert_allclose(s.vertices, hull7.vertices)
    np.testing.assert_array_equal(s.faces, hull7.faces)


def test_obj_rejects_quads():
    with pytest.raises(MeshFormatError, match="non-triangular"):
        parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3 4\n")


def test_obj_rejects_bad_index():
    with pytest.raises(MeshFormatError):
        parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n")


def test_tolerance_override():
    tol = DEFAULT_TOLERANCES.override(pt_rel=1e-8)
    s = build_box(1, 1, 1, tol)
    assert s.eps_pt == pytest.approx(1e-8 * np.sqrt(3))
    with pytest.raises(KeyError):
        DEFAULT_TOLERANCES.override(nope=1.0)


bary = st.tuples(st.floats(0, 1), st.floats(0, 1)).filter(lambda t: t[0] + t[1] <= 1)


@given(f=st.integers(0, 11), b=bary)
def test_locate_is_idempotent(cube, f, b):
    p = cube.canonical(f, (b[0], b[1], 1 - b[0] - b[1]))
    q = locate_point(cube, cube.embed(p), cube.eps_pt * 10)
    assert cube.points_equal(p, q)
    assert p.face == q.face


@given(f=st.integers(0, 11), t=st.floats(0, 1))
def test_canonical_form_is_unique_on_edges(cube, f, t):
    # the same edge point written in both incident faces canonicalizes equally
    tri = cube.faces[f].tolist()
    a, b = tri[0], tri[1]
    p = cube.canonical(f, (1 - t, t, 0.0))
    e = cube.edge_index[(min(a, b), max(a, b))]
    g = [h for h in cube.edge_faces[e] if h != f][0]
    other = cube.faces[g].tolist()
    w = [0.0, 0.0, 0.0]
    w[other.index(a)] = 1 - t
    w[other.index(b)] = t
    q = cube.canonical(g, w)
    assert p == q or cube.points_equal(p, q)
    assert p.face == q.face
