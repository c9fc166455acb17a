"""
Gauge (B-) distance, projection and normal of a point x with respect to K:

    d(K,B,x) = min { r >= 0 : x in K + rB },   x = p + d u,  p in bd K, u in bd B.

The bilinear condition x = sum a_i k_i + r sum b_j v_j becomes a linear
program through g_j = r b_j, so d is the optimum of

    min sum g_j   s.t.  sum a_i k_i + sum g_j v_j = x,  sum a_i = 1,  a, g >= 0.

In the plane the normal bundle of (K, B) is a closed polygon in bd K x bd B.
Each edge of K+B is either an edge of K plus a vertex of B (generalised
curvature 0) or a vertex of K plus an edge of B (curvature infinity), and the
length measures of K and B are read off those two kinds of pieces.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import sympy

from engine.diameters import na_exact, polygon_ratio
from engine.errors import (
    BoundViolated, DimensionMismatch, FormulaMismatch, GaugeBodyError, GaugeDegenerate,
    Infeasible, MeasureMismatch, MissingSeed, NotGeneralPosition, NotStronglyGeneralPosition,
)
from engine.geom_core import (
    Arithmetic, Polytope, canonical_direction, convex_hull, cross2, dot, float_arithmetic,
    norm_sq, support_set, vadd, vscale, vsub, volume,
)
from engine.lp import hull_membership, solve_lp
from engine.minkowski import difference_body, is_centrally_symmetric, minkowski_sum
from engine.position import general_relative_position, strongly_general_relative_position
from engine.utils import load_config, scalar_to_json, to_fraction

cfg = load_config()

EDGE_OF_K = "edge_of_K_x_vertex_of_B"
VERTEX_OF_K = "vertex_of_K_x_edge_of_B"


# -------------------------------
# GAUGE DISTANCE
# -------------------------------
@dataclass(frozen=True)
class GaugeResult:
    x: Tuple
    d: object
    p: Tuple
    u: Tuple

    def to_json(self):
        return {"x": scalar_to_json(list(self.x)), "d": scalar_to_json(self.d),
                "p": scalar_to_json(list(self.p)), "u": scalar_to_json(list(self.u))}


def _origin(dim, arith: Arithmetic):
    return tuple(Fraction(0) if arith.exact else 0.0 for _ in range(dim))


def require_gauge_body(B: Polytope):
    if B.locate(_origin(B.dim, B.arith)) != "interior":
        raise GaugeBodyError("The gauge body B must contain the origin in its interior; translate it first")


def gauge_distance(K: Polytope, B: Polytope, x, check_unique: bool = True,
                   limit: Optional[int] = None) -> GaugeResult:
    if K.dim != B.dim or len(x) != K.dim:
        raise DimensionMismatch(f"K (dim {K.dim}), B (dim {B.dim}) and x (len {len(x)}) must agree")
    require_gauge_body(B)
    arith = K.arith
    x = arith.point(x)
    mk, mb = len(K.vertices), len(B.vertices)
    A = [[k[d] for k in K.vertices] + [b[d] for b in B.vertices] for d in range(K.dim)]
    A.append([1] * mk + [0] * mb)
    c = [0] * mk + [1] * mb
    res = solve_lp(c, A, list(x) + [1], arith)

    def projection(sol):
        p = _origin(K.dim, arith)
        for a, k in zip(sol[:mk], K.vertices):
            p = vadd(p, vscale(k, a))
        return p

    d = res.value
    if arith.sign(d) == 0:
        return GaugeResult(x, d, x, _origin(K.dim, arith))
    p = projection(res.x)
    if check_unique and arith.exact:
        limit = limit or int(cfg["gauge"].get("max_alternative_bases", 200))
        for alt in res.alternative_solutions(limit):
            q = projection(alt)
            if not arith.eq_point(p, q):
                raise GaugeDegenerate(
                    f"B-projection of {scalar_to_json(list(x))} is not unique "
                    f"({scalar_to_json(list(p))} and {scalar_to_json(list(q))}); "
                    "K and B are not in strongly general relative position",
                )
    u = vscale(vsub(x, p), 1 / d)
    return GaugeResult(x, d, p, u)


def bisection_distance(K: Polytope, B: Polytope, x, tol=None):
    """
    d(K,B,x) by bisection on r with the feasibility test x in conv{k_i + r v_j}.
    Returns an upper bracket within ``tol`` of the true distance.
    """
    require_gauge_body(B)
    arith = K.arith
    x = arith.point(x)
    tol = tol if tol is not None else float(cfg["gauge"].get("bisection_tol", 1e-12))
    tol = to_fraction(tol) if arith.exact else float(tol)

    def feasible(r):
        pts = [vadd(k, vscale(b, r)) for k in K.vertices for b in B.vertices]
        return hull_membership(pts, x, arith) is not None

    if K.contains(x):
        return 0 * tol
    lo, hi = 0 * tol, 1 + 0 * tol
    doublings = 0
    while not feasible(hi):
        lo, hi = hi, 2 * hi
        doublings += 1
        if doublings > 64:
            raise Infeasible("Bisection could not bracket the gauge distance")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _projection_rules(K: Polytope, B: Polytope):
    S = minkowski_sum(K, B)
    normals, hk, hb, shift, vecs = [], [], [], [], []
    for f in S.facets:
        n = f.normal
        FK, FB = support_set(K, n), support_set(B, n)
        if FB.dim == 0:
            shift.append(True)
            vecs.append(B.vertices[FB.vertices[0]])
        elif FK.dim == 0:
            shift.append(False)
            vecs.append(K.vertices[FK.vertices[0]])
        else:
            raise NotStronglyGeneralPosition(f"K and B have parallel edges with normal {scalar_to_json(list(n))}")
        normals.append(n)
        hk.append(K.support(n))
        hb.append(B.support(n))
    as_array = lambda rows: np.array([[float(c) for c in r] for r in rows])
    return (as_array(normals), np.array([float(h) for h in hk]), np.array([float(h) for h in hb]),
            np.array(shift), as_array(vecs))


def project_many(K: Polytope, B: Polytope, X, rules=None):
    """
    Vectorised planar B-distance and B-projection:
    d(x) = max(0, max_i (<n_i,x> - h(K,n_i)) / h(B,n_i)) over the facet normals
    n_i of K+B; p follows from the face F(K,n_i) + F(B,n_i) that x hits.
    """
    if K.dim != 2:
        raise DimensionMismatch("project_many works in the plane; use gauge_distance in space")
    require_gauge_body(B)
    N, hk, hb, shift, vecs = rules if rules is not None else _projection_rules(K, B)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    S = (X @ N.T - hk) / hb
    idx = np.argmax(S, axis=1)
    d = np.maximum(S[np.arange(len(X)), idx], 0.0)
    P = np.where(shift[idx][:, None], X - d[:, None] * vecs[idx], vecs[idx])
    P = np.where((d > 0)[:, None], P, X)
    return d, P


def dilate(K: Polytope, B: Polytope, y, lam):
    """y -> p(y) + lam (y - p(y)); maps bd(K + tB) onto bd(K + t lam B)."""
    res = gauge_distance(K, B, y)
    return vadd(res.p, vscale(vsub(res.x, res.p), lam))


# -------------------------------
# LIPSCHITZ CONSTANT
# -------------------------------
@dataclass(frozen=True)
class LipschitzBound:
    sin_sq: object       # sin^2 of the smallest vertex-edge angle of B
    vertex: Tuple
    edge: Tuple

    @property
    def value(self) -> float:
        return 1.0 / math.sqrt(float(self.sin_sq))

    @property
    def exact(self):
        if isinstance(self.sin_sq, Fraction):
            return 1 / sympy.sqrt(sympy.Rational(self.sin_sq.numerator, self.sin_sq.denominator))
        return sympy.Float(self.value)

    def to_json(self):
        return {"bound": self.value, "exact": str(self.exact), "sin_sq": scalar_to_json(self.sin_sq),
                "vertex": scalar_to_json(list(self.vertex)), "edge": scalar_to_json(list(self.edge))}


def lipschitz_bound(B: Polytope) -> LipschitzBound:
    """
    1 / sin(a0) where a0 is the smallest angle between a boundary point b of B
    and a supporting line at b. Along an edge the angle is smallest at an
    endpoint, so vertex against incident edge covers every configuration.
    """
    if B.dim != 2:
        raise DimensionMismatch("lipschitz_bound is defined for polygons")
    require_gauge_body(B)
    best = None
    for a, b, e in B.edge_vectors():
        for v in (a, b):
            s = cross2(v, e) ** 2 / (norm_sq(v) * norm_sq(e))
            if best is None or s < best.sin_sq:
                best = LipschitzBound(s, v, e)
    return best


@dataclass(frozen=True)
class ProbeResult:
    max_ratio: float
    x: Tuple
    y: Tuple
    pairs: int

    def to_json(self):
        return {"max_ratio": self.max_ratio, "x": list(self.x), "y": list(self.y), "pairs": self.pairs}


def _float_body(P: Polytope) -> Polytope:
    arith = float_arithmetic()
    return convex_hull([tuple(float(c) for c in v) for v in P.vertices], P.dim, arith)


def lipschitz_probe(K: Polytope, B: Polytope, samples: Optional[int] = None, seed: Optional[int] = None,
                    margin: Optional[float] = None) -> ProbeResult:
    """
    Largest observed |p(x) - p(y)| / |x - y| over seeded pairs outside K in a box
    around K grown by ``margin`` times its extent. Half of the pairs are drawn
    independently, half as close neighbours.
    """
    if seed is None:
        raise MissingSeed("lipschitz_probe needs an explicit seed")
    samples = samples or int(cfg["gauge"].get("probe_samples", 10000))
    margin = float(margin if margin is not None else cfg["gauge"].get("probe_margin", 1.0))
    require_gauge_body(B)
    lo, hi = K.bounding_box()
    lo = np.array([float(c) for c in lo])
    hi = np.array([float(c) for c in hi])
    extent = float(np.max(hi - lo))
    lo, hi = lo - margin * extent, hi + margin * extent
    rng = np.random.default_rng(seed)

    X = rng.uniform(lo, hi, size=(samples, K.dim))
    Y = rng.uniform(lo, hi, size=(samples, K.dim))
    half = samples // 2
    scale = extent * 10.0 ** (-rng.uniform(1, 4, size=(samples - half, 1)))
    Y[half:] = X[half:] + scale * rng.uniform(-1, 1, size=(samples - half, K.dim))

    if K.dim == 2:
        rules = _projection_rules(K, B)
        dx, PX = project_many(K, B, X, rules)
        dy, PY = project_many(K, B, Y, rules)
    else:
        fK, fB = _float_body(K), _float_body(B)
        dx, PX, dy, PY = [], [], [], []
        for pts, ds, ps in ((X, dx, PX), (Y, dy, PY)):
            for z in pts:
                r = gauge_distance(fK, fB, tuple(z), check_unique=False)
                ds.append(float(r.d))
                ps.append([float(c) for c in r.p])
        dx, PX, dy, PY = map(np.array, (dx, PX, dy, PY))

    outside = (dx > 0) & (dy > 0)
    dist = np.linalg.norm(X - Y, axis=1)
    valid = outside & (dist > 0)
    ratios = np.zeros(samples)
    ratios[valid] = np.linalg.norm(PX[valid] - PY[valid], axis=1) / dist[valid]
    i = int(np.argmax(ratios))
    result = ProbeResult(float(ratios[i]), tuple(float(c) for c in X[i]), tuple(float(c) for c in Y[i]),
                         int(valid.sum()))
    logging.info(f"Lipschitz probe: max ratio {result.max_ratio:.6f} over {result.pairs} pairs (seed {seed})")
    return result


# -------------------------------
# NORMAL BUNDLE
# -------------------------------
def edge_length(vec, arith: Arithmetic):
    """Exact length as a sympy radical in exact mode."""
    sq = norm_sq(vec)
    if arith.exact:
        sq = Fraction(sq)
        return sympy.sqrt(sympy.Rational(sq.numerator, sq.denominator))
    return math.sqrt(sq)


@dataclass(frozen=True)
class BundlePiece:
    kind: str
    x_part: Tuple        # one point (vertex of K) or two points (edge of K), in walking order
    b_part: Tuple
    normal: Tuple        # outer normal of the edge of K+B
    curvature: float     # 0 or inf
    length: object

    def to_json(self):
        return {
            "kind": self.kind,
            "x_part": scalar_to_json([list(p) for p in self.x_part]),
            "b_part": scalar_to_json([list(p) for p in self.b_part]),
            "normal": scalar_to_json(list(self.normal)),
            "curvature": "inf" if math.isinf(self.curvature) else 0,
            "length": str(self.length),
        }


def _ordered(points, e):
    return tuple(sorted(points, key=lambda p: dot(p, e)))


def normal_bundle(K: Polytope, B: Polytope) -> List[BundlePiece]:
    if K.dim != 2 or B.dim != 2:
        raise DimensionMismatch("normal_bundle is implemented for polygon pairs")
    arith = K.arith
    if arith.exact and B.arith.exact:
        report = strongly_general_relative_position(K, B)
        if not report.holds:
            raise NotStronglyGeneralPosition("K and B are not in strongly general relative position",
                                             report=report)
    S = minkowski_sum(K, B)
    pieces = []
    for _, _, e in S.edge_vectors():
        n = canonical_direction((e[1], -e[0]), arith)
        FK, FB = support_set(K, n), support_set(B, n)
        xs = _ordered(FK.points(K), e)
        bs = _ordered(FB.points(B), e)
        if FK.dim == 1 and FB.dim == 0:
            pieces.append(BundlePiece(EDGE_OF_K, xs, bs, n, 0.0, edge_length(vsub(xs[1], xs[0]), arith)))
        elif FK.dim == 0 and FB.dim == 1:
            pieces.append(BundlePiece(VERTEX_OF_K, xs, bs, n, math.inf, edge_length(vsub(bs[1], bs[0]), arith)))
        else:
            raise NotStronglyGeneralPosition(f"Edge of K+B with normal {scalar_to_json(list(n))} "
                                             f"splits as dims {FK.dim}+{FB.dim}")
    logging.info(f"Normal bundle: {len(pieces)} pieces")
    return pieces


def bundle_is_closed(pieces: Sequence[BundlePiece], arith: Arithmetic) -> bool:
    m = len(pieces)
    for i in range(m):
        cur, nxt = pieces[i], pieces[(i + 1) % m]
        if not (arith.eq_point(cur.x_part[-1], nxt.x_part[0]) and arith.eq_point(cur.b_part[-1], nxt.b_part[0])):
            return False
    return True


# -------------------------------
# LENGTH MEASURES
# -------------------------------
def pseudo_angle(v):
    """Exact, strictly monotone stand-in for the polar angle, in [0, 4)."""
    x, y = v
    if x > 0 and y >= 0:
        return y / (x + y)
    if x <= 0 and y > 0:
        return 1 + (-x) / (y - x)
    if x < 0 and y <= 0:
        return 2 + (-y) / (-x - y)
    return 3 + x / (x - y)


@dataclass(frozen=True)
class Arc:
    """Half-open arc of directions [start, end), counter-clockwise; start == end is the full circle."""
    start: Tuple
    end: Tuple

    def contains(self, v) -> bool:
        a, b, t = pseudo_angle(self.start), pseudo_angle(self.end), pseudo_angle(v)
        span = (b - a) % 4
        if span == 0:
            span = 4
        return (t - a) % 4 < span

    def to_json(self):
        return {"start": scalar_to_json(list(self.start)), "end": scalar_to_json(list(self.end))}


def make_arcs(boundaries: Sequence, arith: Arithmetic = None) -> List[Arc]:
    """Partition of the circle cut at the given boundary directions."""
    if not boundaries:
        boundaries = [(1, 0)]
    pts = [tuple(to_fraction(c) for c in b) if arith is None or arith.exact else tuple(float(c) for c in b)
           for b in boundaries]
    pts = sorted(pts, key=pseudo_angle)
    return [Arc(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))]


@dataclass(frozen=True)
class LengthMeasure:
    atoms: Tuple          # (Arc, mass) pairs

    @property
    def total(self):
        return sum((m for _, m in self.atoms), sympy.Integer(0))

    def to_json(self):
        return {
            "atoms": [{"arc": arc.to_json(), "mass": str(m), "value": float(m)} for arc, m in self.atoms],
            "total": str(self.total),
        }


def _same(a, b, arith: Arithmetic) -> bool:
    if arith.exact:
        return sympy.simplify(sympy.sympify(a) - sympy.sympify(b)) == 0
    return math.isclose(float(a), float(b), rel_tol=0, abs_tol=arith.tol(max(abs(float(a)), 1.0)))


def length_measures(K: Polytope, B: Polytope, arcs: Optional[Sequence[Arc]] = None,
                    pieces: Optional[Sequence[BundlePiece]] = None):
    """
    S_1(K, w) integrated over the bundle with weight 1/sqrt(1+k^2), and
    S_1(B, w) with weight k/sqrt(1+k^2), each compared arc by arc against the
    edge lengths binned by outer normal. Returns (measure of K, measure of B).
    """
    arith = K.arith
    arcs = arcs or make_arcs([], arith)
    pieces = pieces if pieces is not None else normal_bundle(K, B)
    zero = sympy.Integer(0) if arith.exact else 0.0

    def direct(P: Polytope, arc: Arc):
        total = zero
        for _, _, e in P.edge_vectors():
            if arc.contains((e[1], -e[0])):
                total += edge_length(e, arith)
        return total

    atoms_k, atoms_b = [], []
    for arc in arcs:
        flat_k = sum((p.length for p in pieces if p.curvature == 0 and arc.contains(p.normal)), zero)
        flat_b = sum((p.length for p in pieces if math.isinf(p.curvature) and arc.contains(p.normal)), zero)
        dk, db = direct(K, arc), direct(B, arc)
        if not _same(flat_k, dk, arith) or not _same(flat_b, db, arith):
            raise MeasureMismatch(
                f"Arc {arc.to_json()}: bundle gives ({flat_k}, {flat_b}) but edge lengths give ({dk}, {db})"
            )
        atoms_k.append((arc, flat_k))
        atoms_b.append((arc, flat_b))
    return LengthMeasure(tuple(atoms_k)), LengthMeasure(tuple(atoms_b))


# -------------------------------
# MIXED VOLUME IDENTITY
# -------------------------------
@dataclass(frozen=True)
class MixedVolumeIdentity:
    v_dk_k: object
    v_dk_minus_k: object
    v_dk: object
    via: str

    def to_json(self):
        return {"V(DK,K)": scalar_to_json(self.v_dk_k), "V(DK,-K)": scalar_to_json(self.v_dk_minus_k),
                "V2(DK)": scalar_to_json(self.v_dk), "via": self.via}


def mixed_volume_identity(K: Polytope) -> MixedVolumeIdentity:
    """
    V(DK,K) + V(DK,-K) = V_2(DK), with V(DK,M) = (1/2) sum over edges e of M of
    h(DK, rot e). The edges come from the bundle of (K, -K) when that pair is in
    strongly general relative position, otherwise straight from K and -K.
    """
    if K.dim != 2:
        raise DimensionMismatch("mixed_volume_identity is implemented for polygons")
    minus = K.negate()
    half = lambda e: K.width((e[1], -e[0])) / 2
    try:
        pieces = normal_bundle(K, minus)
        v_k = sum((half(vsub(p.x_part[1], p.x_part[0])) for p in pieces if p.curvature == 0), 0 * K.vertices[0][0])
        v_mk = sum((half(vsub(p.b_part[1], p.b_part[0])) for p in pieces if math.isinf(p.curvature)),
                   0 * K.vertices[0][0])
        via = "bundle"
    except NotStronglyGeneralPosition:
        v_k = sum((half(e) for _, _, e in K.edge_vectors()), 0 * K.vertices[0][0])
        v_mk = sum((half(e) for _, _, e in minus.edge_vectors()), 0 * K.vertices[0][0])
        via = "edges"
    v_dk = volume(difference_body(K))
    if not K.arith.eq(v_k + v_mk, v_dk):
        raise FormulaMismatch(f"V(DK,K) + V(DK,-K) = {v_k + v_mk} but V2(DK) = {v_dk}")
    return MixedVolumeIdentity(v_k, v_mk, v_dk, via)


# -------------------------------
# PLANAR BOUNDS
# -------------------------------
@dataclass(frozen=True)
class Theorem2Report:
    na: object
    ratio: object
    is_triangle: bool
    is_symmetric: bool
    source: str

    def to_json(self):
        return {"na": scalar_to_json(self.na), "ratio": scalar_to_json(self.ratio),
                "is_triangle": self.is_triangle, "is_symmetric": self.is_symmetric,
                "source": self.source, "holds": True}


def theorem2_bound_check(K: Polytope) -> Theorem2Report:
    """
    1 <= N_a(K) <= V_2(DK) / (2 V_2(K)) <= 3 for a polygon, with N_a = 3 exactly
    for triangles. Centrally symmetric polygons take N_a = 1 (every affine
    diameter runs through the centre).
    """
    if K.dim != 2:
        raise DimensionMismatch("theorem2_bound_check is implemented for polygons")
    arith = K.arith
    ratio = polygon_ratio(K)
    symmetric = is_centrally_symmetric(K)
    report = general_relative_position(K)
    if report.holds:
        na, source = na_exact(K).value, "slabs"
        if not arith.eq(na, ratio):
            raise BoundViolated(f"N_a = {na} differs from V2(DK)/(2 V2(K)) = {ratio}")
    elif symmetric:
        na, source = Fraction(1) if arith.exact else 1.0, "central_symmetry"
    else:
        raise NotGeneralPosition("K is neither in general relative position nor centrally symmetric",
                                 report=report)
    triangle = len(K.vertices) == 3
    if arith.sign(na - 1) < 0 or arith.sign(ratio - na) < 0 or arith.sign(3 - ratio) < 0:
        raise BoundViolated(f"Bounds 1 <= {na} <= {ratio} <= 3 fail")
    if arith.eq(na, 3) != triangle:
        raise BoundViolated(f"N_a = {na} but triangle = {triangle}")
    return Theorem2Report(na, ratio, triangle, symmetric, source)
