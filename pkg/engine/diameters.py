"""
Affine diameters of polytopes in general relative position.

Every facet F(DP,u) of the difference body pairs the faces F = F(P,u) and
G = F(P,-u). The affine diameters running between them sweep the slab
A(F,G) = conv(F u G), and a point off the exceptional set lies on exactly
one diameter per unordered slab containing it. Hence

    N_a(P) = (1 / (2 V_n(P))) * sum over ordered pairs of V_n(A(F,G))
           = (n+1) / V_n(P) * int_0^1 V_n((1-t)P - tP) dt - 1.

Slab volumes come from two independent paths that must agree:

* hull path: volume of conv(F u G);
* formula path, with h the width h(DP, .) taken against an unnormalised
  normal so no square roots appear:
    - plane, edge e against a vertex: h(DP, rot e) / 2 with rot e = (e_y, -e_x);
    - space, facet against a vertex: |mu| h(DP, N) / 6 where the doubled
      vector area of the facet is mu * N;
    - space, edge f against edge g: h(DP, f x g) / 6. This is the
      (1/3) h |f| |g| sin(phi) / 2 form of the slab volume, with
      |f x g| = |f| |g| sin(phi) absorbing the normalisation of u.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from engine.errors import (
    DegenerateInput, DimensionMismatch, FormulaMismatch, MismatchedPaths, MissingSeed,
    NotGeneralPosition, NotSupported, OnExceptionalSet, OutsideBody,
)
from engine.geom_core import (
    EXACT, Face, Polytope, convex_hull, convex_polygon_intersection_area, cross3, dot,
    polygon_area, support_set, vadd, vneg, vscale, vsub, volume,
)
from engine.lp import hull_membership
from engine.minkowski import difference_body, volume_polynomial
from engine.position import general_relative_position
from engine.utils import load_config, scalar_to_json

cfg = load_config()


# -------------------------------
# FACET PAIRS
# -------------------------------
@dataclass(frozen=True)
class FacetPair:
    u: Tuple                 # facet normal of DP (canonical, unnormalised)
    width: object            # h(DP, u)
    F: Face                  # F(P, u)
    G: Face                  # F(P, -u), i.e. the reflection of F(-P, u)
    slab: Polytope = field(compare=False, repr=False)
    body: Polytope = field(compare=False, repr=False)

    @property
    def kind(self) -> str:
        return f"{self.F.dim}-{self.G.dim}"

    def to_json(self):
        return {
            "u": scalar_to_json(list(self.u)),
            "width": scalar_to_json(self.width),
            "F": list(self.F.vertices),
            "G": list(self.G.vertices),
            "kind": self.kind,
        }


def _exact_pairs(P: Polytope) -> List[FacetPair]:
    report = general_relative_position(P)
    if not report.holds:
        raise NotGeneralPosition(
            f"P and -P are not in general relative position ({len(report.witnesses)} violating directions)",
            report=report,
        )
    DP = difference_body(P)
    pairs = []
    for facet in DP.facets:
        u = facet.normal
        F = support_set(P, u)
        G = support_set(P, vneg(u))
        slab = convex_hull(F.points(P) + G.points(P), P.dim, P.arith)
        pairs.append(FacetPair(u, facet.offset, F, G, slab, P))
    return pairs


def _float_pairs(P: Polytope) -> List[FacetPair]:
    """
    Pairs of a float polytope, enumerated on its exact image (every float is a
    dyadic rational) and carried back onto the float vertices.
    """
    exact = convex_hull([tuple(Fraction(c) for c in v) for v in P.vertices], P.dim, EXACT)
    index = {v: i for i, v in enumerate(P.vertices)}

    def carry(face: Face) -> Face:
        try:
            idx = sorted(index[tuple(float(c) for c in exact.vertices[i])] for i in face.vertices)
        except KeyError:
            raise DegenerateInput("A vertex of the exact hull was merged away by the float tolerance")
        return Face(face.dim, tuple(idx), tuple(float(c) for c in face.normal))

    pairs = []
    for pair in _exact_pairs(exact):
        F, G = carry(pair.F), carry(pair.G)
        slab = convex_hull(F.points(P) + G.points(P), P.dim, P.arith)
        pairs.append(FacetPair(tuple(float(c) for c in pair.u), float(pair.width), F, G, slab, P))
    return pairs


def facet_pairs(P: Polytope) -> List[FacetPair]:
    if P.dim not in (2, 3):
        raise NotSupported(f"facet_pairs needs dim 2 or 3, got {P.dim}")
    pairs = _exact_pairs(P) if P.arith.exact else _float_pairs(P)
    logging.info(f"{len(pairs)} facet pairs for a {P.dim}-polytope with {len(P.vertices)} vertices")
    return pairs


def unordered_pairs(pairs: Sequence[FacetPair]) -> List[FacetPair]:
    """One representative per slab (the pair for u and for -u share it)."""
    return [p for p in pairs if p.F.vertices < p.G.vertices]


# -------------------------------
# SLAB VOLUMES
# -------------------------------
def _facet_ring(P: Polytope, face: Face):
    members = set(face.vertices)
    for f in P.facets:
        if set(f.vertices) == members:
            return f, P.facet_points(f)
    raise DegenerateInput(f"Face {face.vertices} is not a facet of P")


def _formula_volume(pair: FacetPair):
    P = pair.body
    F, G = pair.F.points(P), pair.G.points(P)
    if P.dim == 2:
        a, b = F if pair.F.dim == 1 else G
        e = vsub(b, a)
        return P.width((e[1], -e[0])) / 2
    if pair.F.dim == 2 or pair.G.dim == 2:
        facet, ring = _facet_ring(P, pair.F if pair.F.dim == 2 else pair.G)
        doubled = (0, 0, 0)
        for k in range(len(ring)):
            doubled = vadd(doubled, cross3(ring[k], ring[(k + 1) % len(ring)]))
        mu = dot(doubled, facet.normal) / dot(facet.normal, facet.normal)
        return abs(mu) * P.width(facet.normal) / 6
    f = vsub(F[1], F[0])
    g = vsub(G[1], G[0])
    return P.width(cross3(f, g)) / 6


def slab_volume_paths(pair: FacetPair):
    """(hull path, formula path)."""
    return volume(pair.slab), _formula_volume(pair)


def slab_volume(pair: FacetPair):
    hull, formula = slab_volume_paths(pair)
    if not pair.body.arith.eq(hull, formula):
        raise MismatchedPaths(
            f"Slab volume for u={pair.u}: hull path {hull} but formula path {formula}",
            kind_of_pair=pair.kind,
        )
    return hull


# -------------------------------
# EXACT MEAN NUMBER
# -------------------------------
@dataclass(frozen=True)
class DiameterCount:
    value: object
    via_eq0: object
    via_t1: object
    volume: object
    slab_volumes: Tuple
    pairs: Tuple[FacetPair, ...]
    via_planar: Optional[object] = None

    def to_json(self):
        payload = {
            "na": scalar_to_json(self.value),
            "via_eq0": scalar_to_json(self.via_eq0),
            "via_t1": scalar_to_json(self.via_t1),
            "volume": scalar_to_json(self.volume),
            "pairs": [dict(p.to_json(), slab_volume=scalar_to_json(v))
                      for p, v in zip(self.pairs, self.slab_volumes)],
        }
        if self.via_planar is not None:
            payload["via_planar"] = scalar_to_json(self.via_planar)
        return payload


def na_exact(P: Polytope) -> DiameterCount:
    pairs = facet_pairs(P)
    arith = P.arith
    n = P.dim
    V = volume(P)
    slabs = [slab_volume(p) for p in pairs]
    via_eq0 = sum(slabs, 0 * V) / (2 * V)
    poly = volume_polynomial(P)
    via_t1 = (n + 1) * poly.integral / V - 1
    if not arith.eq(via_eq0, via_t1):
        raise FormulaMismatch(f"Slab sum gives {via_eq0} but the volume polynomial gives {via_t1}")
    via_planar = None
    if n == 2:
        via_planar = volume(difference_body(P)) / (2 * V)
        if not arith.eq(via_planar, via_eq0):
            raise FormulaMismatch(f"V(DP)/(2V(P)) = {via_planar} differs from {via_eq0}")
    logging.info(f"N_a = {via_eq0} from {len(pairs)} ordered facet pairs")
    return DiameterCount(via_eq0, via_eq0, via_t1, V, tuple(slabs), tuple(pairs), via_planar)


# -------------------------------
# DIAMETERS THROUGH A POINT
# -------------------------------
def _check_point(P: Polytope, z):
    if len(z) != P.dim:
        raise DimensionMismatch(f"Point {z} does not have {P.dim} coordinates")
    z = P.arith.point(z)
    where = P.locate(z)
    if where == "exterior":
        raise OutsideBody(f"Point {scalar_to_json(list(z))} lies outside P")
    if where == "boundary":
        raise OnExceptionalSet(f"Point {scalar_to_json(list(z))} lies on the boundary of P")
    return z


def na_point(P: Polytope, z, pairs: Optional[Sequence[FacetPair]] = None, method: str = "halfspace") -> int:
    """
    Number of affine diameters through an interior point z: half the number of
    ordered pairs whose slab contains z. ``method="lp"`` decides membership with
    the point-in-hull LP and cross-checks it against the halfspace test.
    """
    z = _check_point(P, z)
    pairs = pairs if pairs is not None else facet_pairs(P)
    hits = 0
    for pair in pairs:
        where = pair.slab.locate(z)
        if where == "boundary":
            raise OnExceptionalSet(
                f"Point {scalar_to_json(list(z))} lies on the boundary of the slab for u={scalar_to_json(list(pair.u))}",
                u=scalar_to_json(list(pair.u)),
            )
        inside = where == "interior"
        if method == "lp":
            by_lp = hull_membership(list(pair.slab.vertices), z, P.arith) is not None
            if by_lp != inside:
                raise MismatchedPaths(f"LP membership {by_lp} disagrees with halfspace test for u={pair.u}")
        hits += inside
    return hits // 2


@dataclass(frozen=True)
class Diameter:
    x: Tuple     # endpoint in F(P, u)
    y: Tuple     # endpoint in F(P, -u)
    u: Tuple

    def to_json(self):
        return {"x": scalar_to_json(list(self.x)), "y": scalar_to_json(list(self.y)),
                "u": scalar_to_json(list(self.u))}


def _diameter_in_slab(P: Polytope, pair: FacetPair, z) -> Diameter:
    u = pair.u
    top = P.support(u)
    t = (top - dot(u, z)) / pair.width
    F, G = pair.F.points(P), pair.G.points(P)
    if len(G) == 1:
        y = G[0]
        x = vscale(vsub(z, vscale(y, t)), 1 / (1 - t))
    elif len(F) == 1:
        x = F[0]
        y = vscale(vsub(z, vscale(x, 1 - t)), 1 / t)
    else:
        a, b = F
        c, d = G
        f, g = vsub(b, a), vsub(d, c)
        w = vsub(vsub(z, vscale(a, 1 - t)), vscale(c, t))
        fg = cross3(f, g)
        nn = dot(fg, fg)
        alpha = dot(cross3(w, g), fg) / nn
        beta = dot(cross3(f, w), fg) / nn
        x = vadd(a, vscale(f, alpha / (1 - t)))
        y = vadd(c, vscale(g, beta / t))
    return Diameter(x, y, u)


def diameters_through(P: Polytope, z, pairs: Optional[Sequence[FacetPair]] = None) -> List[Diameter]:
    """The affine diameters through z, one per unordered slab containing it."""
    z = _check_point(P, z)
    pairs = pairs if pairs is not None else facet_pairs(P)
    out = []
    for pair in unordered_pairs(pairs):
        where = pair.slab.locate(z)
        if where == "boundary":
            raise OnExceptionalSet(f"Point lies on the boundary of the slab for u={pair.u}")
        if where == "interior":
            out.append(_diameter_in_slab(P, pair, z))
    return out


# -------------------------------
# MONTE CARLO
# -------------------------------
@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int
    rejected: int          # draws outside P
    exceptional: int       # draws on a slab boundary, resampled
    min_count: int
    max_count: int

    def to_json(self):
        return {
            "mean": self.mean, "stderr": self.stderr, "samples": self.samples, "seed": self.seed,
            "rejected": self.rejected, "exceptional": self.exceptional,
            "min_count": self.min_count, "max_count": self.max_count,
        }


def _halfspaces(poly: Polytope):
    N = np.array([[float(c) for c in f.normal] for f in poly.facets])
    b = np.array([float(f.offset) for f in poly.facets])
    norms = np.linalg.norm(N, axis=1)
    return N / norms[:, None], b / norms


def _sample_chunk(seq, size, lo, hi, body, slabs, tol, max_rejections):
    rng = np.random.default_rng(seq)
    NP, bP = body
    counts = []
    collected = rejected = exceptional = 0
    while collected < size:
        batch = 2 * (size - collected) + 16
        X = rng.uniform(lo, hi, size=(batch, len(lo)))
        inside = np.all(X @ NP.T - bP < -tol, axis=1)
        rejected += int((~inside).sum())
        X = X[inside]
        c = np.zeros(len(X), dtype=np.int64)
        on_boundary = np.zeros(len(X), dtype=bool)
        for N, b in slabs:
            vals = X @ N.T - b
            interior = np.all(vals < -tol, axis=1)
            closed = np.all(vals <= tol, axis=1)
            c += interior
            on_boundary |= closed & ~interior
        exceptional += int(on_boundary.sum())
        if exceptional > max_rejections:
            raise OnExceptionalSet(f"More than {max_rejections} samples fell on slab boundaries")
        keep = c[~on_boundary][: size - collected]
        counts.append(keep)
        collected += len(keep)
    return np.concatenate(counts), rejected, exceptional


def na_montecarlo(P: Polytope, samples: int, seed: Optional[int], chunk_size: Optional[int] = None,
                  workers: Optional[int] = None, pairs: Optional[Sequence[FacetPair]] = None) -> MonteCarloEstimate:
    """
    Uniform rejection sampling from the bounding box of P. Each fixed-size
    chunk draws from its own SeedSequence child, so the estimate depends on
    the seed and chunk size only, never on the worker count.
    """
    if seed is None:
        raise MissingSeed("Monte Carlo sampling needs an explicit --seed")
    if samples < 2:
        raise DegenerateInput(f"Need at least 2 samples, got {samples}")
    chunk_size = chunk_size or int(cfg["sampling"].get("chunk_size", 10000))
    workers = workers or int(cfg["sampling"].get("workers", 1))
    max_rejections = int(cfg["sampling"].get("max_rejections", 1000))
    pairs = pairs if pairs is not None else facet_pairs(P)

    lo, hi = P.bounding_box()
    lo = np.array([float(c) for c in lo])
    hi = np.array([float(c) for c in hi])
    tol = float(cfg["arithmetic"].get("eps", 1e-9)) * max(1.0, float(np.max(hi - lo)))
    body = _halfspaces(P)
    slabs = [_halfspaces(p.slab) for p in unordered_pairs(pairs)]

    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))

    def job(i):
        out = _sample_chunk(seqs[i], sizes[i], lo, hi, body, slabs, tol, max_rejections)
        logging.debug(f"Monte Carlo chunk {i + 1}/{len(sizes)} done")
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(len(sizes))))
    else:
        results = [job(i) for i in range(len(sizes))]

    counts = np.concatenate([r[0] for r in results])
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(samples))
    est = MonteCarloEstimate(mean, stderr, samples, seed, sum(r[1] for r in results),
                             sum(r[2] for r in results), int(counts.min()), int(counts.max()))
    logging.info(f"Monte Carlo N_a: {mean:.6f} ± {stderr:.6f} ({samples} samples, seed {seed})")
    return est


# -------------------------------
# PLANAR TRIANGULATION OF P - P
# -------------------------------
def planar_triangulation(P: Polytope) -> List[Tuple]:
    """
    For every edge F with opposite vertex v(F): conv((F - v(F)) u {o}) and its
    reflection. The 2m triangles tile DP.
    """
    if P.dim != 2:
        raise DimensionMismatch(f"planar_triangulation needs a polygon, got dim {P.dim}")
    report = general_relative_position(P)
    if not report.holds:
        raise NotGeneralPosition("Polygon has parallel edges; DP is not triangulated by edge-vertex pairs",
                                 report=report)
    origin = tuple(0 * c for c in P.vertices[0])
    triangles = []
    for a, b, e in P.edge_vectors():
        opposite = support_set(P, (-e[1], e[0]))
        v = P.vertices[opposite.vertices[0]]
        tri = (vsub(a, v), vsub(b, v), origin)
        triangles.append(tri)
        triangles.append(tuple(vneg(p) for p in tri))
    return triangles


@dataclass(frozen=True)
class TriangulationCheck:
    area_sum: object
    difference_area: object
    max_overlap: object

    def to_json(self):
        return {k: scalar_to_json(v) for k, v in self.__dict__.items()}


def check_triangulation(P: Polytope, triangles: Sequence[Tuple]) -> TriangulationCheck:
    arith = P.arith
    area_sum = sum((polygon_area(t) for t in triangles), 0 * P.vertices[0][0])
    target = volume(difference_body(P))
    overlap = 0 * area_sum
    for i in range(len(triangles)):
        for j in range(i + 1, len(triangles)):
            overlap = max(overlap, convex_polygon_intersection_area(triangles[i], triangles[j], arith))
    if not arith.eq(area_sum, target) or arith.sign(overlap, target) != 0:
        raise FormulaMismatch(f"Triangles cover {area_sum} of DP (area {target}), max overlap {overlap}")
    return TriangulationCheck(area_sum, target, overlap)


# -------------------------------
# LOWER BOUND SHARPNESS
# -------------------------------
def perturbed_hexagon(delta) -> Polytope:
    """Centrally symmetric hexagon with two vertices moved by delta; delta != 0 gives general position."""
    d = delta
    pts = [(1, 0), (1 + d, 1 + d), (0, 1), (-1, d), (-1, -1), (0, -1)]
    return convex_hull(pts, 2)


def lower_bound_sharpness(deltas: Sequence = (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000)),
                          family: Callable = perturbed_hexagon) -> List[Tuple]:
    """
    N_a along a family of polygons in general relative position that converges
    to a centrally symmetric one. Values stay strictly above the dimension
    while approaching it, although the limit body itself has N_a = 1.
    """
    out = []
    for delta in deltas:
        P = family(delta)
        na = na_exact(P).value
        if P.arith.sign(na - P.dim) <= 0:
            raise FormulaMismatch(f"N_a = {na} is not above {P.dim} for delta = {delta}")
        out.append((delta, na))
    return out


def polygon_ratio(P: Polytope):
    """V_2(DP) / (2 V_2(P)) for any polygon."""
    return volume(difference_body(P)) / (2 * volume(P))
