import numpy as np
import pytest
from hypothesis import given, strategies as st

from volterra_qso.simplex import (
    SUM_TOL,
    SimplexError,
    face_indices,
    make_point,
    merge_coordinates,
    on_face,
    sample_interior,
    vertex,
)


@pytest.mark.parametrize(
    "i, m, expected",
    [(1, 4, [1, 0, 0, 0]), (3, 3, [0, 0, 1]), (2, 2, [0, 1])],
)
def test_vertex(i, m, expected):
    np.testing.assert_array_equal(vertex(i, m), expected)


@pytest.mark.parametrize("i, m", [(0, 3), (4, 3), (1, 1)])
def test_vertex_out_of_range(i, m):
    with pytest.raises(SimplexError):
        vertex(i, m)


def test_make_point_rejects_bad_input():
    with pytest.raises(SimplexError):
        make_point([0.5, 0.6])
    with pytest.raises(SimplexError):
        make_point([1.5, -0.5])
    with pytest.raises(SimplexError):
        make_point([1.0])
    with pytest.raises(SimplexError):
        make_point([np.nan, 1.0])


def test_make_point_keeps_zeros_exactly():
    x = make_point([0.0, 0.25, 0.75])
    assert x[0] == 0.0


def test_sample_interior_basic():
    x = sample_interior(3, seed=7)
    assert np.all(x > 0)
    assert abs(x.sum() - 1) <= SUM_TOL


def test_sample_interior_deterministic():
    np.testing.assert_array_equal(sample_interior(2, seed=11), sample_interior(2, seed=11))
    assert not np.array_equal(sample_interior(4, seed=1), sample_interior(4, seed=2))


def test_sample_interior_mean_is_barycenter():
    # flat Dirichlet on 4 coordinates: mean 1/4, var (1/4)(3/4)/5 per coordinate
    n = 100_000
    rng = np.random.default_rng(5)
    xs = np.array([sample_interior(4, rng) for _ in range(n)])
    sigma = np.sqrt(0.25 * 0.75 / 5) / np.sqrt(n)
    assert np.all(np.abs(xs.mean(axis=0) - 0.25) < 3 * sigma)
    assert np.all(xs > 0)


def test_on_face_examples():
    assert on_face([0, 1, 0, 0], 1)
    assert not on_face([0.5, 0.5, 0], 1)
    assert on_face([0, 0, 0.4, 0.6], {1, 2})
    assert not on_face([0, 0.1, 0.3, 0.6], {1, 2})
    assert on_face([1e-14, 0.5, 0.5], 1, tol=1e-12)


def test_face_indices_validation():
    assert face_indices(3) == frozenset({3})
    with pytest.raises(SimplexError):
        face_indices(5, m=4)
    with pytest.raises(SimplexError):
        face_indices([])


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_vertex_face_incidence(m):
    for i in range(1, m + 1):
        v = vertex(i, m)
        assert not on_face(v, i)
        assert all(on_face(v, j) for j in range(1, m + 1) if j != i)


def test_merge_coordinates():
    x = [0.1, 0.2, 0.3, 0.4]
    np.testing.assert_allclose(merge_coordinates(x, [[1], [2, 3], [4]]), [0.1, 0.5, 0.4])


@given(st.lists(st.floats(min_value=0, max_value=1e3), min_size=2, max_size=8).filter(lambda v: sum(v) > 1e-3))
def test_normalized_vectors_are_points(v):
    x = make_point(np.array(v) / np.sum(v), tol=1e-9)
    assert np.all(x >= 0)
    assert abs(x.sum() - 1) <= SUM_TOL
