from fractions import Fraction

import numpy as np
import pytest

from engine.errors import BoundViolated, DimensionMismatch, NotSupported
from engine.geom_core import convex_hull, float_arithmetic, volume
from engine.minkowski import (
    combination, difference_body, integral_mixed, is_centrally_symmetric, minkowski_sum,
    VolumePolynomial, rogers_shephard_check, simplex_volume_polynomial, volume_polynomial, width_profile,
)
from tests.conftest import polyhedron


def test_minkowski_sum_of_squares(square):
    S = minkowski_sum(square, square)
    assert len(S.vertices) == 4
    assert volume(S) == 4


def test_minkowski_sum_with_point_list(quad):
    assert minkowski_sum(quad, [(0, 0)]).vertices == quad.vertices
    shifted = minkowski_sum(quad, [(1, 1)])
    assert volume(shifted) == volume(quad)


def test_minkowski_sum_dimension_mismatch(square, cube):
    with pytest.raises(DimensionMismatch):
        minkowski_sum(square, cube)


def test_difference_body_of_triangle_is_hexagon(triangle):
    DP = difference_body(triangle)
    assert len(DP.vertices) == 6
    assert volume(DP) == 6 * volume(triangle)
    assert is_centrally_symmetric(DP)


def test_combination_endpoints(quad):
    assert volume(combination(quad, Fraction(0))) == 4
    assert volume(combination(quad, Fraction(1))) == 4
    assert volume(combination(quad, Fraction(1, 2))) == volume(difference_body(quad)) / 4


def test_width_profile_matches_support(quad):
    for u, h in width_profile(quad):
        assert h == quad.width(u)


def test_triangle_volume_polynomial(triangle):
    poly = volume_polynomial(triangle)
    assert poly.coeffs == (Fraction(1, 2), Fraction(2), Fraction(1, 2))
    assert poly.mixed_volumes == (Fraction(1, 2), Fraction(1), Fraction(1, 2))
    assert poly.integral == Fraction(2, 3)
    assert poly.difference_volume == 3
    assert poly.evaluate(Fraction(1, 2)) == volume(difference_body(triangle)) / 4


def test_square_volume_polynomial_is_constant(square):
    poly = volume_polynomial(square)
    assert poly.coeffs == (1, 2, 1)
    assert poly.integral == 1
    for t in (Fraction(1, 3), Fraction(3, 4)):
        assert poly.evaluate(t) == 1


def test_symmetric_polynomial_reverses_to_itself(quad):
    poly = volume_polynomial(quad)
    assert poly.reversed().coeffs == poly.coeffs
    assert poly.difference_volume == 20


def test_simplex_closed_form_matches_interpolation(tetrahedron):
    poly = volume_polynomial(tetrahedron)
    closed = simplex_volume_polynomial(3, Fraction(1, 6))
    assert poly.coeffs == closed.coeffs
    assert poly.mixed_volumes == closed.mixed_volumes
    assert integral_mixed(tetrahedron) == Fraction(1, 3)
    assert integral_mixed(closed) == Fraction(1, 3)
    assert poly.difference_volume == Fraction(10, 3)


def test_simplex_closed_form_any_dimension():
    poly = simplex_volume_polynomial(5, Fraction(1, 120))
    assert poly.difference_volume == Fraction(252, 120)
    with pytest.raises(NotSupported):
        simplex_volume_polynomial(0)


def test_float_mode_polynomial():
    P = convex_hull([(0.0, 0.0), (3.0, 0.0), (2.0, 2.0), (0.0, 1.0)], 2, float_arithmetic())
    poly = volume_polynomial(P)
    assert poly.integral == pytest.approx(14 / 3)


def test_rogers_shephard_gaps(body):
    rep = rogers_shephard_check(body("quad_rs"))
    assert rep.integral == Fraction(10, 3)
    assert (rep.lower_gap, rep.upper_gap) == (Fraction(1, 3), Fraction(2, 3))
    assert rep.to_json()["rs_lower_ok"] and rep.to_json()["rs_upper_ok"]


def test_rogers_shephard_equality_cases(square, triangle, tetrahedron, body):
    assert rogers_shephard_check(square).lower_gap == 0
    assert rogers_shephard_check(body("hexagon_symmetric")).lower_gap == 0
    assert rogers_shephard_check(triangle).upper_gap == 0
    assert rogers_shephard_check(tetrahedron).upper_gap == 0


def test_rogers_shephard_rejects_impossible_polynomial(square):
    bogus = VolumePolynomial(2, (Fraction(1), Fraction(0), Fraction(1)), (Fraction(1), Fraction(0), Fraction(1)))
    with pytest.raises(BoundViolated):
        rogers_shephard_check(square, bogus)


def test_central_symmetry(square, triangle):
    assert is_centrally_symmetric(square)
    assert not is_centrally_symmetric(triangle)
    assert is_centrally_symmetric(polyhedron((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1),
                                             (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)))



def random_fractions(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a, b = (int(v) for v in rng.integers(1, 30, size=2))
        if a < b:
            out.append(Fraction(a, b))
    return out


@pytest.mark.parametrize("name", ["quad", "tetrahedron"])
def test_polynomial_matches_hull_volume_at_random_t(request, name):
    P = request.getfixturevalue(name)
    poly = volume_polynomial(P)
    for t in random_fractions(5, seed=13):
        assert volume(combination(P, t)) == poly.evaluate(t)


def test_polynomial_is_translation_invariant(quad, tetrahedron):
    assert volume_polynomial(quad.translate((3, -2))).coeffs == volume_polynomial(quad).coeffs
    assert volume_polynomial(tetrahedron.translate((1, 5, -4))).coeffs == volume_polynomial(tetrahedron).coeffs


def test_polynomial_scales_with_power_of_dimension(quad, tetrahedron):
    lam = Fraction(3, 2)
    for P in (quad, tetrahedron):
        base = volume_polynomial(P).coeffs
        scaled = volume_polynomial(P.scale(lam)).coeffs
        assert scaled == tuple(lam ** P.dim * c for c in base)
