import pytest

from engine.errors import DimensionMismatch, ModeNotSupported
from engine.geom_core import convex_hull, float_arithmetic
from engine.position import general_relative_position, strongly_general_relative_position


def test_triangle_and_tetrahedron_are_in_general_position(triangle, tetrahedron):
    assert general_relative_position(triangle).holds
    assert general_relative_position(tetrahedron).holds


def test_square_has_parallel_edges(square):
    report = general_relative_position(square)
    assert not report.holds
    assert len(report.witnesses) == 4
    assert all(w.dim_first + w.dim_second == 2 for w in report.witnesses)
    assert report.to_json()["holds"] is False


def test_rogers_shephard_quad_is_not_in_general_position(body):
    report = general_relative_position(body("quad_rs"))
    assert not report.holds
    assert {tuple(abs(c) for c in w.u) for w in report.witnesses} == {(1, 0)}


def test_cube_fails_general_position(cube):
    assert not general_relative_position(cube).holds


def test_position_checks_need_exact_mode():
    P = convex_hull([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], 2, float_arithmetic())
    with pytest.raises(ModeNotSupported):
        general_relative_position(P)


def test_strong_position_on_corpus_pairs(corpus):
    pairs = [fx["pair"] for fx in corpus.values() if fx["kind"] == "pair"]
    assert len(pairs) == 5
    for K, B in pairs:
        report = strongly_general_relative_position(K, B)
        assert report.holds
        assert report.checked > 0


def test_parallel_edges_break_strong_position(square, centred_square, diamond):
    report = strongly_general_relative_position(square, centred_square)
    assert not report.holds
    assert all(w.dim_sum == 1 and w.dim_first + w.dim_second == 2 for w in report.witnesses)
    assert strongly_general_relative_position(square, diamond).holds


def test_strong_position_dimension_mismatch(square, cube):
    with pytest.raises(DimensionMismatch):
        strongly_general_relative_position(square, cube)


@pytest.mark.parametrize("name", ["triangle", "square", "quad", "tetrahedron", "cube"])
def test_position_of_reflection_and_affine_images(request, name):
    P = request.getfixturevalue(name)
    holds = general_relative_position(P).holds
    assert general_relative_position(P.negate()).holds == holds
    if P.dim == 2:
        image = P.affine_image([[2, 1], [1, 3]], (5, -1))
    else:
        image = P.affine_image([[1, 2, 0], [0, 1, 1], [1, 0, 3]], (1, 1, -2))
    assert general_relative_position(image).holds == holds
