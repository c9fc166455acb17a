"""
Bodies K, B in space whose B-projection p(K,B,.) is not Lipschitz.

Generators on the parabolic cylinder y = x^2:

    x_n = (1/n, 1/n^2, 0),   y_n = (1/n, 1/n^2, 1/n)

    S_n = [x_{n+1}, y_n] (n odd),  [x_n, y_{n+1}] (n even)
    T_n = [x_n, y_{n+1}] (n odd),  [x_{n+1}, y_n] (n even)

    K = conv(S_1 .. S_N, (0,1,1), (0,1,-1)),   B = conv(T_1 .. T_N)

truncated at depth N. For odd n the vertical plane H_n through the
parabola points at 1/n and 1/(n+1) supports both bodies: every other
generator (c, c^2) satisfies (c - a)(c - b) > 0 and lies strictly on the
origin's side. So F(K+B, w_n) = S_n + T_n, a parallelogram, and the probe
points z1 = x_{n+1} + y_{n+1} and z2 = x_n + y_{n+1} + lam (x_n - x_{n+1})
lie on it with gauge distance 1.

B is replaced by B' = B - c with c the centroid of its vertices. Because
d(K,B,z) = 1 on that facet, d(K,B',z-c) = 1 as well and the projection is
unchanged, so probing z - c against B' measures p(K,B,z).
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import pandas as pd

from engine.errors import (
    BoundViolated, DegenerateInput, InfeasibleLambda, PositionCheckFailed, SeparationFailed,
)
from engine.gauge import gauge_distance
from engine.geom_core import (
    EXACT, Polytope, convex_hull, cross3, dot, norm_sq, support_set, vadd, vneg, vscale, vsub,
)
from engine.position import PositionReport, strongly_general_relative_position
from engine.utils import load_config, scalar_to_json

cfg = load_config()

ANCHORS = ((0, 1, 1), (0, 1, -1))


def x_point(n: int):
    return (Fraction(1, n), Fraction(1, n * n), Fraction(0))


def y_point(n: int):
    return (Fraction(1, n), Fraction(1, n * n), Fraction(1, n))


def segment_s(n: int):
    return (x_point(n + 1), y_point(n)) if n % 2 else (x_point(n), y_point(n + 1))


def segment_t(n: int):
    return (x_point(n), y_point(n + 1)) if n % 2 else (x_point(n + 1), y_point(n))


@dataclass(frozen=True)
class CounterexampleInstance:
    depth: int
    K: Polytope
    B: Polytope                  # translated so that o is interior
    shift: Tuple                 # centroid of the untranslated B's vertices
    x_points: Dict[int, Tuple] = field(repr=False)
    y_points: Dict[int, Tuple] = field(repr=False)
    position: Optional[PositionReport] = field(default=None, repr=False)
    generators_are_vertices: bool = True

    def to_json(self):
        return {
            "depth": self.depth,
            "K": self.K.to_json(),
            "B": self.B.to_json(),
            "shift": scalar_to_json(list(self.shift)),
            "generators_are_vertices": self.generators_are_vertices,
            "strongly_general_position": None if self.position is None else self.position.holds,
        }


def build_bodies(N: int, verify: bool = True) -> CounterexampleInstance:
    """
    Depth-N truncation. With ``verify`` the pair is checked for strongly
    general relative position and PositionCheckFailed is raised when it fails.
    """
    if N < 3:
        raise DegenerateInput(f"Counterexample depth must be at least 3, got {N}")
    s_ends = [p for n in range(1, N + 1) for p in segment_s(n)]
    t_ends = [p for n in range(1, N + 1) for p in segment_t(n)]
    K = convex_hull(s_ends + [tuple(Fraction(c) for c in a) for a in ANCHORS], 3, EXACT)
    raw_B = convex_hull(t_ends, 3, EXACT)
    shift = raw_B.vertex_centroid()
    B = raw_B.translate(vneg(shift))

    k_vertices, b_vertices = set(K.vertices), set(raw_B.vertices)
    generators_are_vertices = all(p in k_vertices for p in s_ends) and all(p in b_vertices for p in t_ends)
    if not generators_are_vertices:
        logging.warning(f"Depth {N}: some generators are not hull vertices")

    position = None
    if verify:
        position = strongly_general_relative_position(K, B)
        if not position.holds:
            raise PositionCheckFailed(
                f"Depth-{N} truncation is not in strongly general relative position "
                f"({len(position.witnesses)} violating faces)",
                witnesses=[w.to_json() for w in position.witnesses],
            )
    xs = {n: x_point(n) for n in range(1, N + 2)}
    ys = {n: y_point(n) for n in range(1, N + 2)}
    logging.info(f"Counterexample depth {N}: K has {len(K.vertices)} vertices, B has {len(B.vertices)}")
    return CounterexampleInstance(N, K, B, shift, xs, ys, position, generators_are_vertices)


# -------------------------------
# SEPARATION
# -------------------------------
def separating_normal(n: int):
    """Outer normal w of the plane H_n: <w, p> = a b on the parabola points at a = 1/(n+1), b = 1/n."""
    a, b = Fraction(1, n + 1), Fraction(1, n)
    return (a + b, Fraction(-1), Fraction(0)), a * b


def verify_separation(inst: CounterexampleInstance, n: int):
    """
    H_n supports K in exactly S_n and B in exactly T_n; every other generator
    and both anchors lie strictly on the origin's side.
    """
    w, level = separating_normal(n)
    on_plane = {x_point(n), x_point(n + 1), y_point(n), y_point(n + 1)}
    others = [p for m in range(1, inst.depth + 2) if m not in (n, n + 1) for p in (x_point(m), y_point(m))]
    for p in others + [tuple(Fraction(c) for c in a) for a in ANCHORS]:
        if dot(w, p) >= level:
            raise SeparationFailed(f"Point {scalar_to_json(list(p))} is not strictly below H_{n}")
    for p in on_plane:
        if dot(w, p) != level:
            raise SeparationFailed(f"Generator {scalar_to_json(list(p))} is off H_{n}")
    face_k = set(support_set(inst.K, w).points(inst.K))
    face_b = {vadd(p, inst.shift) for p in support_set(inst.B, w).points(inst.B)}
    if face_k != set(segment_s(n)) or face_b != set(segment_t(n)):
        raise SeparationFailed(f"H_{n} does not cut out S_{n} and T_{n}")
    return True


# -------------------------------
# PROBES
# -------------------------------
@dataclass(frozen=True)
class RatioProbe:
    n: int
    lam: Fraction
    z1: Tuple
    z2: Tuple
    p1: Tuple
    p2: Tuple
    dp_sq: Fraction
    dz_sq: Fraction
    end_dp_sq: Fraction      # same quantities at lam = n/(n+1)
    end_dz_sq: Fraction

    @property
    def ratio(self) -> float:
        return math.sqrt(self.dp_sq / self.dz_sq)

    @property
    def lower_bound(self) -> float:
        return (self.n + 1) / (2 * math.sqrt(13))

    @property
    def passed(self) -> bool:
        return 52 * self.dp_sq > (self.n + 1) ** 2 * self.dz_sq

    def to_json(self):
        return {
            "n": self.n, "lambda": scalar_to_json(self.lam), "ratio": self.ratio,
            "lower_bound": self.lower_bound, "pass": self.passed,
            "z1": scalar_to_json(list(self.z1)), "z2": scalar_to_json(list(self.z2)),
            "p1": scalar_to_json(list(self.p1)), "p2": scalar_to_json(list(self.p2)),
            "dp_sq": scalar_to_json(self.dp_sq), "dz_sq": scalar_to_json(self.dz_sq),
            "end_dp_sq": scalar_to_json(self.end_dp_sq), "end_dz_sq": scalar_to_json(self.end_dz_sq),
        }


def _project(inst: CounterexampleInstance, z, check_unique=True):
    res = gauge_distance(inst.K, inst.B, vsub(z, inst.shift), check_unique=check_unique)
    return res.p, res.d


def _on_segment(p, seg) -> bool:
    a, b = seg
    ab, ap = vsub(b, a), vsub(p, a)
    if any(c != 0 for c in cross3(ab, ap)):
        return False
    s = dot(ap, ab)
    return 0 <= s <= norm_sq(ab)


def feasible_lambdas(inst: CounterexampleInstance, n: int, grid: Optional[int] = None) -> List[Fraction]:
    """Grid values k/grid in (0,1) for which p(z2) lies on S_n."""
    grid = grid or int(cfg["counterexample"].get("lambda_grid", 64))
    xn, xn1, yn1 = x_point(n), x_point(n + 1), y_point(n + 1)
    z0 = vadd(xn, yn1)
    step = vsub(xn, xn1)
    seg = segment_s(n)
    out = []
    for k in range(1, grid):
        lam = Fraction(k, grid)
        p, _ = _project(inst, vadd(z0, vscale(step, lam)), check_unique=False)
        if _on_segment(p, seg):
            out.append(lam)
    return out


def _probe_point(inst: CounterexampleInstance, n: int, lam: Fraction):
    xn, xn1, yn1 = x_point(n), x_point(n + 1), y_point(n + 1)
    z2 = vadd(vadd(xn, yn1), vscale(vsub(xn, xn1), lam))
    p2, d2 = _project(inst, z2)
    if not _on_segment(p2, segment_s(n)):
        raise InfeasibleLambda(f"p(z2) = {scalar_to_json(list(p2))} is not on S_{n} for lambda = {lam}")
    if d2 != 1:
        raise SeparationFailed(f"z2 is not on bd(K+B): d = {d2}")
    return z2, p2


def probe_ratio(inst: CounterexampleInstance, n: int, grid: Optional[int] = None) -> RatioProbe:
    """
    Ratio |p(z1) - p(z2)| / |z1 - z2| at the midpoint of the feasible lambda
    grid values. The ratio does not depend on lambda; the two separate
    estimates |p(z1) - p(z2)| > 1/(n+1) and |z1 - z2| < 2 sqrt(13)/(n+1)^2 are
    checked at the end of the feasible interval, lam = n/(n+1), where p(z2)
    sits at height 1/(n+1) on S_n.
    """
    if n % 2 == 0 or n < 1 or n + 1 > inst.depth:
        raise DegenerateInput(f"Probe index must be odd with n+1 <= {inst.depth}, got {n}")
    verify_separation(inst, n)
    grid = grid or int(cfg["counterexample"].get("lambda_grid", 64))
    lams = feasible_lambdas(inst, n, grid)
    if not lams:
        raise InfeasibleLambda(f"No lambda in (0,1) on the k/{grid} grid puts p(z2) on S_{n}")
    lam = (lams[0] + lams[-1]) / 2

    xn1, yn1 = x_point(n + 1), y_point(n + 1)
    z1 = vadd(xn1, yn1)
    p1, d1 = _project(inst, z1)
    if p1 != xn1:
        raise SeparationFailed(f"p(z1) = {scalar_to_json(list(p1))}, expected x_{n + 1}")
    if d1 != 1:
        raise SeparationFailed(f"z1 is not on bd(K+B): d = {d1}")
    z2, p2 = _probe_point(inst, n, lam)
    z_end, p_end = _probe_point(inst, n, Fraction(n, n + 1))

    probe = RatioProbe(n, lam, z1, z2, p1, p2,
                       norm_sq(vsub(p1, p2)), norm_sq(vsub(z1, z2)),
                       norm_sq(vsub(p1, p_end)), norm_sq(vsub(z1, z_end)))
    if not probe.passed:
        raise BoundViolated(f"Ratio {probe.ratio:.6f} does not exceed {probe.lower_bound:.6f} for n = {n}")
    if probe.dp_sq * probe.end_dz_sq != probe.end_dp_sq * probe.dz_sq:
        raise BoundViolated(f"Ratio depends on lambda for n = {n}")
    if not probe.end_dp_sq * (n + 1) ** 2 > 1:
        raise BoundViolated(f"|p(z1) - p(z2)|^2 = {probe.end_dp_sq} is not above 1/(n+1)^2")
    if not probe.end_dz_sq * (n + 1) ** 4 < 52:
        raise BoundViolated(f"|z1 - z2|^2 = {probe.end_dz_sq} is not below 52/(n+1)^4")
    logging.info(f"Probe n={n}: lambda={lam}, ratio {probe.ratio:.6f} > {probe.lower_bound:.6f}")
    return probe


def ratio_table(inst: CounterexampleInstance, ns: Optional[List[int]] = None) -> pd.DataFrame:
    """One probe per odd n with n+1 <= depth; columns n, ratio, bound, pass."""
    ns = ns or [n for n in range(3, inst.depth, 2)]
    probes = [probe_ratio(inst, n) for n in ns]
    ratios = [p.ratio for p in probes]
    if any(b <= a for a, b in zip(ratios, ratios[1:])):
        raise BoundViolated(f"Probe ratios are not strictly increasing: {ratios}")
    return pd.DataFrame({
        "n": [p.n for p in probes],
        "ratio": ratios,
        "bound": [p.lower_bound for p in probes],
        "pass": [p.passed for p in probes],
    })
