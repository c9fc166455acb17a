import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

from engine.errors import (
    DegenerateInput, GaugeBodyError, GaugeDegenerate, MissingSeed, NotGeneralPosition, NotStronglyGeneralPosition,
)
from engine.gauge import (
    EDGE_OF_K, VERTEX_OF_K, Arc, bisection_distance, bundle_is_closed, dilate, gauge_distance,
    length_measures, lipschitz_bound, lipschitz_probe, make_arcs, mixed_volume_identity, normal_bundle,
    project_many, pseudo_angle, theorem2_bound_check,
)
from engine.geom_core import convex_hull, float_arithmetic
from engine.minkowski import minkowski_sum

F = Fraction


def test_gauge_distance_edge_of_k(square, diamond):
    res = gauge_distance(square, diamond, (2, F(1, 2)))
    assert res.d == 1
    assert res.p == (1, F(1, 2))
    assert res.u == (1, 0)


def test_gauge_distance_vertex_of_k(square, diamond):
    res = gauge_distance(square, diamond, (2, 2))
    assert res.d == 2
    assert res.p == (1, 1)
    assert res.u == (F(1, 2), F(1, 2))


def test_gauge_distance_inside_is_zero(square, diamond):
    res = gauge_distance(square, diamond, (F(1, 3), F(2, 3)))
    assert res.d == 0
    assert res.p == (F(1, 3), F(2, 3))


def test_gauge_body_must_contain_origin(square):
    with pytest.raises(GaugeBodyError):
        gauge_distance(square, square, (2, 2))


def test_parallel_edges_make_projection_ambiguous(square, centred_square):
    with pytest.raises(GaugeDegenerate):
        gauge_distance(square, centred_square, (2, F(1, 2)))


def test_bisection_brackets_the_lp_distance(square, diamond):
    d = bisection_distance(square, diamond, (2, F(1, 2)), tol=F(1, 1000))
    assert 1 <= d <= 1 + F(1, 1000)
    assert bisection_distance(square, diamond, (F(1, 2), F(1, 2))) == 0


def test_project_many_matches_lp(square, diamond):
    X = np.array([[2.0, 0.5], [2.0, 2.0], [0.5, 0.5], [-1.0, 0.25]])
    d, P = project_many(square, diamond, X)
    assert d == pytest.approx([1.0, 2.0, 0.0, 1.0])
    assert P == pytest.approx(np.array([[1.0, 0.5], [1.0, 1.0], [0.5, 0.5], [0.0, 0.25]]))
    for x, dx in zip(X, d):
        exact = gauge_distance(square, diamond, tuple(F(c) for c in x))
        assert float(exact.d) == pytest.approx(dx)


def test_dilate_moves_along_the_gauge_normal(square, diamond):
    assert dilate(square, diamond, (2, F(1, 2)), 2) == (3, F(1, 2))


def test_lipschitz_bound(centred_square, diamond):
    bound = lipschitz_bound(centred_square)
    assert bound.sin_sq == F(1, 2)
    assert bound.value == pytest.approx(math.sqrt(2))
    assert bound.exact == sympy.sqrt(2)
    assert lipschitz_bound(diamond).value == pytest.approx(math.sqrt(2))


def test_lipschitz_probe_stays_below_bound(square, diamond):
    probe = lipschitz_probe(square, diamond, samples=2000, seed=1)
    assert probe.pairs > 0
    assert 0 < probe.max_ratio <= lipschitz_bound(diamond).value + 1e-9


def test_lipschitz_probe_needs_seed(square, diamond):
    with pytest.raises(MissingSeed):
        lipschitz_probe(square, diamond, samples=10)


def test_normal_bundle_of_square_and_diamond(square, diamond):
    pieces = normal_bundle(square, diamond)
    assert len(pieces) == 8
    assert bundle_is_closed(pieces, square.arith)
    assert sum(p.kind == EDGE_OF_K for p in pieces) == 4
    assert sum(p.kind == VERTEX_OF_K for p in pieces) == 4
    for p in pieces:
        if p.kind == EDGE_OF_K:
            assert p.curvature == 0 and p.length == 1
        else:
            assert math.isinf(p.curvature) and p.length == sympy.sqrt(2)


def test_normal_bundle_needs_strong_position(square, centred_square):
    with pytest.raises(NotStronglyGeneralPosition):
        normal_bundle(square, centred_square)


def test_pseudo_angle_is_monotone():
    dirs = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
    angles = [pseudo_angle(tuple(F(c) for c in d)) for d in dirs]
    assert angles == sorted(angles)
    assert angles[0] == 0 and angles[2] == 1 and angles[4] == 2 and angles[6] == 3


def test_arcs_are_half_open():
    arc = Arc((F(1), F(0)), (F(0), F(1)))
    assert arc.contains((F(1), F(0)))
    assert arc.contains((F(1), F(1)))
    assert not arc.contains((F(0), F(1)))
    full = make_arcs([])
    assert len(full) == 1
    assert full[0].contains((F(-1), F(0)))


def test_length_measures(square, diamond):
    arcs = make_arcs([(1, 0), (0, 1), (-1, 0), (0, -1)])
    mk, mb = length_measures(square, diamond, arcs)
    assert mk.total == 4
    assert sympy.simplify(mb.total - 4 * sympy.sqrt(2)) == 0
    assert len(mk.atoms) == 4
    # each quadrant holds one edge of the diamond
    assert all(sympy.simplify(m - sympy.sqrt(2)) == 0 for _, m in mb.atoms)


def test_length_measures_on_corpus_pairs(corpus):
    arcs = make_arcs([(1, 0), (0, 1), (-1, 0), (0, -1)])
    for fx in corpus.values():
        if fx["kind"] == "pair":
            K, B = fx["pair"]
            mk, mb = length_measures(K, B, arcs)
            perimeter = sum(sympy.sqrt(sympy.Rational(e[0] ** 2 + e[1] ** 2)) for _, _, e in K.edge_vectors())
            assert sympy.simplify(mk.total - perimeter) == 0


def test_mixed_volume_identity(triangle, square, quad):
    tri = mixed_volume_identity(triangle)
    assert tri.via == "bundle"
    assert tri.v_dk == 3
    assert tri.v_dk_k == tri.v_dk_minus_k == F(3, 2)
    sq = mixed_volume_identity(square)
    assert sq.via == "edges"
    assert sq.v_dk_k + sq.v_dk_minus_k == 4
    assert mixed_volume_identity(quad).v_dk == 20


def test_theorem2_bounds(triangle, square, quad, body):
    tri = theorem2_bound_check(triangle)
    assert (tri.na, tri.is_triangle, tri.source) == (3, True, "slabs")
    sq = theorem2_bound_check(square)
    assert (sq.na, sq.ratio, sq.source) == (1, 2, "central_symmetry")
    assert theorem2_bound_check(quad).na == F(5, 2)
    hexagon = theorem2_bound_check(body("hexagon_perturbed"))
    assert 2 < hexagon.na <= 3
    with pytest.raises(NotGeneralPosition):
        theorem2_bound_check(body("quad_rs"))


EXTERIOR = [(7, 2), (-5, 3), (1, -6), (6, 6)]


def pinned_pairs(corpus, square, diamond):
    return [(square, diamond)] + [fx["pair"] for fx in corpus.values() if fx["kind"] == "pair"]


def test_distance_is_convex(corpus, square, diamond):
    for K, B in pinned_pairs(corpus, square, diamond):
        dist = lambda z: gauge_distance(K, B, z, check_unique=False).d
        for i, x in enumerate(EXTERIOR):
            for y in EXTERIOR[i + 1:]:
                for lam in (F(1, 4), F(1, 2), F(3, 4)):
                    z = tuple((1 - lam) * a + lam * b for a, b in zip(x, y))
                    assert dist(z) <= (1 - lam) * dist(x) + lam * dist(y)


def test_projection_is_constant_along_rays(corpus, square, diamond):
    for K, B in pinned_pairs(corpus, square, diamond):
        for x in EXTERIOR:
            res = gauge_distance(K, B, x)
            for s in (F(1, 2), F(2), F(3)):
                y = tuple(p + s * (c - p) for p, c in zip(res.p, res.x))
                moved = gauge_distance(K, B, y)
                assert moved.p == res.p
                assert moved.d == s * res.d


def test_level_sets(corpus, square, diamond):
    for K, B in pinned_pairs(corpus, square, diamond):
        for x in EXTERIOR:
            res = gauge_distance(K, B, x)
            assert K.locate(res.p) == "boundary"
            assert B.locate(res.u) == "boundary"
            assert minkowski_sum(K, B.scale(res.d)).locate(res.x) == "boundary"


def random_instances(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        try:
            K = convex_hull([tuple(F(int(c)) for c in row) for row in rng.integers(-5, 6, size=(5, 2))], 2)
            B = convex_hull([tuple(F(int(c)) for c in row) for row in rng.integers(-4, 5, size=(5, 2))], 2)
        except DegenerateInput:
            continue
        if B.locate((0, 0)) != "interior":
            continue
        x = tuple(F(int(c)) for c in rng.integers(-10, 11, size=2))
        out.append((K, B, x))
    return out


def test_bisection_agrees_with_lp_on_random_instances():
    for K, B, x in random_instances(20, seed=5):
        exact = gauge_distance(K, B, x, check_unique=False).d
        bracket = bisection_distance(K, B, x, tol=F(1, 10 ** 9))
        assert exact <= bracket <= exact + F(1, 10 ** 9)


def test_lipschitz_bound_of_regular_hexagon():
    pts = [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)]
    B = convex_hull(pts, 2, float_arithmetic())
    assert lipschitz_bound(B).value == pytest.approx(2 / math.sqrt(3))


def test_lipschitz_bound_of_affine_hexagon(body):
    bound = lipschitz_bound(body("hexagon_symmetric"))
    assert bound.sin_sq == F(1, 2)
    assert bound.exact == sympy.sqrt(2)


def test_lipschitz_bound_grows_as_a_vertex_drifts():
    values = []
    for t in (F(1), F(11, 10), F(6, 5), F(3, 2), F(2)):
        B = convex_hull([(1, 0), (t, t), (0, 1), (-1, 0), (-1, -1), (0, -1)], 2)
        values.append(lipschitz_bound(B))
    assert values[-1].sin_sq == F(1, 10)
    bounds = [b.value for b in values]
    assert all(a < b for a, b in zip(bounds, bounds[1:]))
