import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geodiam.errors import InvalidArgument, NotSymmetric
from geodiam.involution import (central_symmetry, check_involution, read_permutation,
                                sample_points, vertex_permutation)
from geodiam.surface import TriSurface, locate_point


def test_face_point_is_negated(cube, cube_inv):
    p = locate_point(cube, (0.5, 0.2, -0.1), 1e-9)
    np.testing.assert_allclose(cube.embed(cube_inv(p)), [-0.5, -0.2, 0.1], atol=1e-15)


def test_vertex_maps_to_opposite_vertex(cube, cube_inv):
    p = locate_point(cube, (0.5, 0.5, 0.5), 1e-9)
    q = cube_inv(p)
    assert cube.point_vertex(q) is not None
    np.testing.assert_allclose(cube.embed(q), [-0.5, -0.5, -0.5])


def test_octahedron_vertex(octahedron):
    inv = central_symmetry(octahedron)
    p = locate_point(octahedron, (1, 0, 0), 1e-9)
    np.testing.assert_allclose(octahedron.embed(inv(p)), [-1, 0, 0])


def test_off_center_box_is_not_symmetric(cube):
    moved = TriSurface(cube.vertices + [0.1, 0.0, 0.0], cube.faces, center=(0, 0, 0))
    with pytest.raises(NotSymmetric):
        central_symmetry(moved)


def test_permutation_on_octahedron(octahedron):
    v = octahedron.vertices
    perm = [int(np.argmin(np.linalg.norm(v + x, axis=1))) for x in v]
    inv = vertex_permutation(octahedron, perm)
    p = locate_point(octahedron, (0, 1, 0), 1e-9)
    np.testing.assert_allclose(octahedron.embed(inv(p)), [0, -1, 0])
    rep = check_involution(inv, 50, seed=1)
    assert rep.fixed_point_free and rep.involutive


def test_permutation_validation(cube):
    with pytest.raises(InvalidArgument):
        vertex_permutation(cube, [0, 1, 2])
    with pytest.raises(InvalidArgument):
        vertex_permutation(cube, [1, 2, 0, 3, 4, 5, 6, 7])


def test_read_permutation(tmp_path, cube):
    v = cube.vertices
    perm = [int(np.argmin(np.linalg.norm(v + x, axis=1))) for x in v]
    path = tmp_path / "perm.json"
    path.write_text(json.dumps({"involution": perm}))
    inv = read_permutation(cube, path)
    assert inv.perm.tolist() == perm


def test_cube_check(cube_inv):
    rep = check_involution(cube_inv, 100, seed=0)
    assert rep.involutivity_defect <= 1e-12
    assert rep.fixed_point_free and rep.isometric
    assert rep.min_antipodal_distance > 0.5


def test_identity_has_fixed_points(cube):
    rep = check_involution(vertex_permutation(cube, list(range(8))), 20, seed=0)
    assert not rep.fixed_point_free


def test_plane_reflection_has_fixed_points(cube):
    # x -> -x swaps the two x-faces and fixes the plane x = 0
    v = cube.vertices
    mirrored = v * [-1, 1, 1]
    perm = [int(np.argmin(np.linalg.norm(v - m, axis=1))) for m in mirrored]
    rep = check_involution(vertex_permutation(cube, perm), 50, seed=0)
    assert not rep.fixed_point_free


def test_check_rejects_zero_samples(cube_inv):
    with pytest.raises(InvalidArgument):
        check_involution(cube_inv, 0)


def test_sample_points_deterministic(hull7):
    a = sample_points(hull7, 20, np.random.default_rng(3))
    b = sample_points(hull7, 20, np.random.default_rng(3))
    assert a == b


@given(seed=st.integers(0, 2**32 - 1))
def test_apply_twice_is_identity(hull7, seed):
    inv = central_symmetry(hull7)
    for p in sample_points(hull7, 5, np.random.default_rng(seed)):
        back = inv(inv(p))
        assert np.linalg.norm(hull7.embed(back) - hull7.embed(p)) <= 1e-12
        assert hull7.points_equal(back, p)
