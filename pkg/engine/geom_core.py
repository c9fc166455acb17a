"""
Geometry kernel: scalar arithmetic (exact rationals or tolerant floats),
2D/3D convex hulls with their face lattices, volumes and support sets.

Exact mode works on ``fractions.Fraction`` throughout, so every predicate is
decided without rounding. Float mode compares against ``eps``, scaled up by
the magnitude of the operands once they exceed 1.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from engine.errors import DegenerateInput, DimensionMismatch, VolumeMismatch
from engine.utils import load_config, scalar_to_json, to_fraction, to_float

cfg = load_config()

Scalar = Union[Fraction, float]
Point = Tuple[Scalar, ...]


# -------------------------------
# ARITHMETIC
# -------------------------------
@dataclass(frozen=True)
class Arithmetic:
    mode: str = "exact"
    eps: float = 1e-9

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def coerce(self, value) -> Scalar:
        return to_fraction(value) if self.exact else to_float(value)

    def point(self, coords) -> Point:
        return tuple(self.coerce(c) for c in coords)

    def tol(self, scale=1.0) -> float:
        return self.eps * max(1.0, abs(float(scale)))

    def sign(self, value, scale=1.0) -> int:
        if self.exact:
            return (value > 0) - (value < 0)
        if abs(value) <= self.tol(scale):
            return 0
        return 1 if value > 0 else -1

    def is_zero(self, value, scale=1.0) -> bool:
        return self.sign(value, scale) == 0

    def eq(self, a, b) -> bool:
        return self.sign(a - b, max(abs(float(a)), abs(float(b)))) == 0

    def eq_point(self, p, q) -> bool:
        return len(p) == len(q) and all(self.eq(a, b) for a, b in zip(p, q))


EXACT = Arithmetic("exact")


def float_arithmetic(eps=None) -> Arithmetic:
    return Arithmetic("float", float(eps if eps is not None else cfg["arithmetic"].get("eps", 1e-9)))


def infer_arithmetic(points) -> Arithmetic:
    for p in points:
        for c in p:
            if isinstance(c, float):
                return float_arithmetic()
    return EXACT


# -------------------------------
# VECTOR HELPERS
# -------------------------------
def vadd(p, q):
    return tuple(a + b for a, b in zip(p, q))


def vsub(p, q):
    return tuple(a - b for a, b in zip(p, q))


def vscale(p, s):
    return tuple(a * s for a in p)


def vneg(p):
    return tuple(-a for a in p)


def dot(p, q):
    return sum((a * b for a, b in zip(p, q)), 0)


def cross2(p, q):
    return p[0] * q[1] - p[1] * q[0]


def cross3(p, q):
    return (
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    )


def norm_sq(p):
    return dot(p, p)


def magnitude(p) -> float:
    return max((abs(float(c)) for c in p), default=0.0)


def centroid(points):
    k = len(points)
    total = points[0]
    for p in points[1:]:
        total = vadd(total, p)
    if isinstance(total[0], float):
        return vscale(total, 1.0 / k)
    return vscale(total, Fraction(1, k))


def canonical_direction(u, arith: Arithmetic):
    """Scale u so that its largest absolute component is 1."""
    m = max(abs(c) for c in u)
    if arith.is_zero(m):
        raise DegenerateInput("Zero normal vector")
    return tuple(c / m for c in u)


def affine_rank(points: Sequence[Point], arith: Arithmetic) -> int:
    """Dimension of the affine hull of ``points`` (-1 for the empty set)."""
    if not points:
        return -1
    base = points[0]
    rows = [list(vsub(p, base)) for p in points[1:]]
    scale = max((magnitude(r) for r in rows), default=1.0)
    rank = 0
    ncols = len(base)
    for col in range(ncols):
        pivot = None
        for r in range(rank, len(rows)):
            if arith.sign(rows[r][col], scale) != 0:
                pivot = r
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][col]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / pv
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


# -------------------------------
# FACES AND POLYTOPES
# -------------------------------
@dataclass(frozen=True)
class Face:
    dim: int
    vertices: Tuple[int, ...]
    normal: Point

    def points(self, poly: "Polytope") -> List[Point]:
        return [poly.vertices[i] for i in self.vertices]


@dataclass(frozen=True)
class Facet:
    normal: Point            # canonical, unnormalised outer normal
    offset: Scalar           # h(P, normal)
    vertices: Tuple[int, ...]  # ccw seen from outside (3D); edge order ccw (2D)


@dataclass(frozen=True)
class Polytope:
    dim: int
    vertices: Tuple[Point, ...]
    facets: Tuple[Facet, ...]
    arith: Arithmetic = field(default=EXACT, compare=False)
    cycle: Tuple[int, ...] = ()  # ccw vertex order, polygons only

    # ---- support function and faces ----
    def support(self, u) -> Scalar:
        return max(dot(u, v) for v in self.vertices)

    def support_set(self, u) -> Face:
        return support_set(self, u)

    def width(self, u) -> Scalar:
        """h(DP, u) = h(P, u) + h(P, -u), for the given (unnormalised) u."""
        return self.support(u) + self.support(vneg(u))

    def faces(self, r: int) -> List[Face]:
        return face_lattice(self)[r]

    def edges(self) -> List[Tuple[int, int]]:
        return [f.vertices for f in self.faces(1)]

    def polygon(self) -> List[Point]:
        """Vertices in counter-clockwise order (polygons only)."""
        if self.dim != 2:
            raise DimensionMismatch(f"polygon() needs a 2-polytope, got dim {self.dim}")
        return [self.vertices[i] for i in self.cycle]

    def edge_vectors(self) -> List[Tuple[Point, Point, Point]]:
        """(start, end, end - start) along the ccw boundary of a polygon."""
        poly = self.polygon()
        m = len(poly)
        return [(poly[i], poly[(i + 1) % m], vsub(poly[(i + 1) % m], poly[i])) for i in range(m)]

    def facet_points(self, facet: Facet) -> List[Point]:
        return [self.vertices[i] for i in facet.vertices]

    # ---- membership ----
    def locate(self, x) -> str:
        """'interior', 'boundary' or 'exterior'."""
        on_boundary = False
        for f in self.facets:
            s = self.arith.sign(dot(f.normal, x) - f.offset, max(magnitude(x), abs(float(f.offset))))
            if s > 0:
                return "exterior"
            if s == 0:
                on_boundary = True
        return "boundary" if on_boundary else "interior"

    def contains(self, x) -> bool:
        return self.locate(x) != "exterior"

    # ---- transforms ----
    def negate(self) -> "Polytope":
        return convex_hull([vneg(v) for v in self.vertices], self.dim, self.arith)

    def translate(self, t) -> "Polytope":
        return convex_hull([vadd(v, t) for v in self.vertices], self.dim, self.arith)

    def scale(self, lam) -> "Polytope":
        return convex_hull([vscale(v, lam) for v in self.vertices], self.dim, self.arith)

    def affine_image(self, matrix, shift=None) -> "Polytope":
        shift = shift or tuple(0 for _ in range(self.dim))
        pts = [vadd(tuple(dot(row, v) for row in matrix), shift) for v in self.vertices]
        return convex_hull(pts, self.dim, self.arith)

    def vertex_centroid(self) -> Point:
        return centroid(list(self.vertices))

    def bounding_box(self):
        lo = tuple(min(v[i] for v in self.vertices) for i in range(self.dim))
        hi = tuple(max(v[i] for v in self.vertices) for i in range(self.dim))
        return lo, hi

    def to_json(self):
        return {"dim": self.dim, "vertices": [scalar_to_json(list(v)) for v in self.vertices]}


# -------------------------------
# CONVEX HULLS
# -------------------------------
def _dedupe(points, arith: Arithmetic):
    if arith.exact:
        return sorted(set(points))
    out = []
    for p in sorted(points):
        if not any(arith.eq_point(p, q) for q in out):
            out.append(p)
    return out


def _monotone_chain(pts, arith: Arithmetic) -> List[int]:
    """Indices of the strict hull of sorted 2D points, counter-clockwise."""
    order = list(range(len(pts)))

    def turn(o, a, b):
        v1, v2 = vsub(pts[a], pts[o]), vsub(pts[b], pts[o])
        return arith.sign(cross2(v1, v2), magnitude(v1) * magnitude(v2))

    lower: List[int] = []
    for i in order:
        while len(lower) >= 2 and turn(lower[-2], lower[-1], i) <= 0:
            lower.pop()
        lower.append(i)
    upper: List[int] = []
    for i in reversed(order):
        while len(upper) >= 2 and turn(upper[-2], upper[-1], i) <= 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def _hull2(points, arith: Arithmetic) -> Polytope:
    pts = _dedupe(points, arith)
    if len(pts) < 3 or affine_rank(pts, arith) < 2:
        raise DegenerateInput("All points lie on a line; a polygon needs 3 affinely independent points")
    ring = _monotone_chain(pts, arith)
    kept = sorted(ring)
    index = {old: new for new, old in enumerate(kept)}
    vertices = tuple(pts[i] for i in kept)
    cycle = tuple(index[i] for i in ring)
    # start the cycle at the lexicographically smallest vertex
    start = cycle.index(0)
    cycle = cycle[start:] + cycle[:start]

    facets = []
    m = len(cycle)
    for k in range(m):
        a, b = cycle[k], cycle[(k + 1) % m]
        e = vsub(vertices[b], vertices[a])
        n = canonical_direction((e[1], -e[0]), arith)
        facets.append(Facet(n, dot(n, vertices[a]), (a, b)))
    facets.sort(key=lambda f: tuple(float(c) for c in f.normal) if not arith.exact else f.normal)
    return Polytope(2, vertices, tuple(facets), arith, cycle)


def _orient3(a, b, c, q, arith: Arithmetic) -> int:
    n = cross3(vsub(b, a), vsub(c, a))
    d = vsub(q, a)
    return arith.sign(dot(n, d), magnitude(n) * magnitude(d))


def _initial_simplex(pts, arith: Arithmetic):
    i0 = 0
    i1 = next((i for i in range(1, len(pts)) if not arith.eq_point(pts[i], pts[i0])), None)
    if i1 is None:
        return None
    i2 = next((i for i in range(len(pts))
               if affine_rank([pts[i0], pts[i1], pts[i]], arith) == 2), None)
    if i2 is None:
        return None
    i3 = next((i for i in range(len(pts))
               if _orient3(pts[i0], pts[i1], pts[i2], pts[i], arith) != 0), None)
    if i3 is None:
        return None
    return i0, i1, i2, i3


def _hull3(points, arith: Arithmetic) -> Polytope:
    pts = _dedupe(points, arith)
    simplex = _initial_simplex(pts, arith) if len(pts) >= 4 else None
    if simplex is None:
        raise DegenerateInput("All points lie in a plane; a 3-polytope needs 4 affinely independent points")

    i0, i1, i2, i3 = simplex
    faces = []
    for tri, other in (((i0, i1, i2), i3), ((i0, i1, i3), i2), ((i0, i2, i3), i1), ((i1, i2, i3), i0)):
        a, b, c = tri
        if _orient3(pts[a], pts[b], pts[c], pts[other], arith) > 0:
            tri = (a, c, b)
        faces.append(tri)

    for q in range(len(pts)):
        if q in simplex:
            continue
        visible = [f for f in faces if _orient3(pts[f[0]], pts[f[1]], pts[f[2]], pts[q], arith) > 0]
        if not visible:
            continue
        visible_edges = set()
        for a, b, c in visible:
            visible_edges.update({(a, b), (b, c), (c, a)})
        horizon = [(a, b) for (a, b) in visible_edges if (b, a) not in visible_edges]
        vis = set(visible)
        faces = [f for f in faces if f not in vis] + [(a, b, q) for (a, b) in horizon]

    # merge coplanar triangles into maximal facets
    groups: List[Dict] = []
    for a, b, c in faces:
        n = canonical_direction(cross3(vsub(pts[b], pts[a]), vsub(pts[c], pts[a])), arith)
        off = dot(n, pts[a])
        for g in groups:
            if arith.eq_point(g["normal"], n) and arith.eq(g["offset"], off):
                g["points"].update((a, b, c))
                break
        else:
            groups.append({"normal": n, "offset": off, "points": {a, b, c}})

    raw_facets = []
    for g in groups:
        n = g["normal"]
        k = max(range(3), key=lambda i: abs(n[i]))
        i, j = (k + 1) % 3, (k + 2) % 3
        members = sorted(g["points"], key=lambda idx: (pts[idx][i], pts[idx][j]))
        flat = [(pts[idx][i], pts[idx][j]) for idx in members]
        ring = [members[r] for r in _monotone_chain(flat, arith)]
        if n[k] < 0:
            ring = ring[::-1]
        raw_facets.append((n, g["offset"], ring))

    kept = sorted({idx for _, _, ring in raw_facets for idx in ring})
    index = {old: new for new, old in enumerate(kept)}
    vertices = tuple(pts[i] for i in kept)
    facets = []
    for n, off, ring in raw_facets:
        ring = [index[r] for r in ring]
        start = ring.index(min(ring))
        facets.append(Facet(n, off, tuple(ring[start:] + ring[:start])))
    facets.sort(key=lambda f: tuple(float(c) for c in f.normal) if not arith.exact else f.normal)
    logging.debug(f"3D hull: {len(pts)} input points, {len(vertices)} vertices, {len(facets)} facets")
    return Polytope(3, vertices, tuple(facets), arith)


def convex_hull(points, dim: int, arith: Optional[Arithmetic] = None) -> Polytope:
    """
    Convex hull of a finite point set in the plane or in space.

    Vertices come out in lexicographic order, facets sorted by their
    canonical normal; non-extreme input points are dropped.
    """
    points = list(points)
    if any(len(p) != dim for p in points):
        raise DimensionMismatch(f"Expected {dim}-dimensional points")
    arith = arith or infer_arithmetic(points)
    points = [arith.point(p) for p in points]
    if dim == 2:
        return _hull2(points, arith)
    if dim == 3:
        return _hull3(points, arith)
    raise DimensionMismatch(f"convex_hull supports dim 2 or 3, got {dim}")


# -------------------------------
# FACE LATTICE
# -------------------------------
def face_lattice(poly: Polytope) -> Dict[int, List[Face]]:
    """
    Faces of every dimension, each with a normal from the relative interior
    of its normal cone (a positive sum of the incident facet normals).
    """
    facets = [Face(poly.dim - 1, tuple(sorted(f.vertices)), f.normal) for f in poly.facets]
    if poly.dim == 2:
        incident: Dict[int, List[Point]] = {}
        for f in poly.facets:
            for v in f.vertices:
                incident.setdefault(v, []).append(f.normal)
        verts = [Face(0, (v,), vadd(ns[0], ns[1])) for v, ns in sorted(incident.items())]
        return {0: verts, 1: facets}

    edge_normals: Dict[Tuple[int, int], List[Point]] = {}
    vertex_normals: Dict[int, List[Point]] = {}
    for f in poly.facets:
        ring = f.vertices
        for k in range(len(ring)):
            a, b = ring[k], ring[(k + 1) % len(ring)]
            edge_normals.setdefault((min(a, b), max(a, b)), []).append(f.normal)
            vertex_normals.setdefault(a, []).append(f.normal)
    edges = []
    for key in sorted(edge_normals):
        ns = edge_normals[key]
        total = ns[0]
        for n in ns[1:]:
            total = vadd(total, n)
        edges.append(Face(1, key, total))
    verts = []
    for v in sorted(vertex_normals):
        ns = vertex_normals[v]
        total = ns[0]
        for n in ns[1:]:
            total = vadd(total, n)
        verts.append(Face(0, (v,), total))
    return {0: verts, 1: edges, 2: facets}


def support_set(poly: Polytope, u) -> Face:
    """The face F(P, u): vertices maximising <u, .>, with its dimension."""
    if all(poly.arith.is_zero(c) for c in u):
        raise DegenerateInput("support_set needs a non-zero direction")
    values = [dot(u, v) for v in poly.vertices]
    top = max(values)
    scale = max(abs(float(top)), 1.0)
    idx = tuple(i for i, val in enumerate(values) if poly.arith.sign(val - top, scale) == 0)
    return Face(affine_rank([poly.vertices[i] for i in idx], poly.arith), idx, tuple(u))


# -------------------------------
# VOLUME
# -------------------------------
def polygon_area(points) -> Scalar:
    """Signed shoelace area of a vertex ring (positive for ccw)."""
    m = len(points)
    twice = sum((cross2(points[i], points[(i + 1) % m]) for i in range(m)), 0)
    return twice / 2 if isinstance(twice, float) else Fraction(twice) / 2


def volume(poly: Polytope) -> Scalar:
    """
    Lebesgue measure by fan triangulation from the first vertex. In 3D the
    fan simplices are checked against the signed sum over facet cones from
    the origin; the two must agree.
    """
    arith = poly.arith
    if poly.dim == 2:
        ring = poly.polygon()
        v0 = ring[0]
        total = 0
        for k in range(1, len(ring) - 1):
            piece = cross2(vsub(ring[k], v0), vsub(ring[k + 1], v0))
            if arith.sign(piece, magnitude(v0)) < 0:
                raise VolumeMismatch("Negative fan triangle in polygon area")
            total += piece
        return total / 2 if not arith.exact else Fraction(total) / 2

    if poly.dim != 3:
        raise DimensionMismatch(f"volume supports dim 2 or 3, got {poly.dim}")
    v0 = poly.vertices[0]
    fan = 0
    signed = 0
    for f in poly.facets:
        ring = poly.facet_points(f)
        for k in range(1, len(ring) - 1):
            a, b, c = ring[0], ring[k], ring[k + 1]
            signed += dot(a, cross3(b, c))
            if 0 in f.vertices:
                continue
            piece = dot(vsub(a, v0), cross3(vsub(b, v0), vsub(c, v0)))
            if arith.sign(piece, magnitude(a)) < 0:
                raise VolumeMismatch("Negative fan simplex in polytope volume")
            fan += piece
    if not arith.eq(fan, signed):
        raise VolumeMismatch(f"Fan volume {fan} differs from facet-cone volume {signed}")
    return fan / 6 if not arith.exact else Fraction(fan) / 6


# -------------------------------
# POLYGON CLIPPING
# -------------------------------
def _clip(subject, a, b, arith: Arithmetic):
    out = []
    m = len(subject)
    e = vsub(b, a)
    side = [cross2(e, vsub(p, a)) for p in subject]
    for k in range(m):
        p, q = subject[k], subject[(k + 1) % m]
        sp, sq = side[k], side[(k + 1) % m]
        if arith.sign(sp) >= 0:
            out.append(p)
        if (arith.sign(sp) > 0 and arith.sign(sq) < 0) or (arith.sign(sp) < 0 and arith.sign(sq) > 0):
            t = sp / (sp - sq)
            out.append(vadd(p, vscale(vsub(q, p), t)))
    return out


def convex_polygon_intersection_area(first, second, arith: Arithmetic = EXACT) -> Scalar:
    """Area of the intersection of two convex ccw polygons (Sutherland-Hodgman)."""
    clipped = list(first)
    m = len(second)
    for k in range(m):
        if len(clipped) < 3:
            return Fraction(0) if arith.exact else 0.0
        clipped = _clip(clipped, second[k], second[(k + 1) % m], arith)
    if len(clipped) < 3:
        return Fraction(0) if arith.exact else 0.0
    return abs(polygon_area(clipped))
