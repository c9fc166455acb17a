"""
Minkowski combinations of a polytope with its reflection.

The volume polynomial of t -> V_n((1-t)P - tP) is recovered by evaluating
hull volumes at the nodes t = k/n and solving the Bernstein-form system

    V_n((1-t)P - tP) = sum_k c_k (1-t)^k t^(n-k),   c_k = C(n,k) V(P[k], -P[n-k])

exactly with sympy rationals (numpy in float mode).
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import List, Tuple

import numpy as np
import sympy

from engine.errors import BoundViolated, DimensionMismatch, NotSupported, SingularSystem
from engine.geom_core import Polytope, convex_hull, vadd, vscale, vsub, volume
from engine.utils import scalar_to_json


# -------------------------------
# MINKOWSKI SUMS
# -------------------------------
def minkowski_sum(P: Polytope, Q) -> Polytope:
    """
    P + Q for a polytope Q or a finite point list Q (so P + {0} is allowed).
    """
    points = Q.vertices if isinstance(Q, Polytope) else [P.arith.point(q) for q in Q]
    if any(len(q) != P.dim for q in points):
        raise DimensionMismatch(f"Cannot add a {len(points[0])}-dimensional body to a {P.dim}-polytope")
    return convex_hull([vadd(p, q) for p in P.vertices for q in points], P.dim, P.arith)


def difference_body(P: Polytope) -> Polytope:
    return convex_hull([vsub(p, q) for p in P.vertices for q in P.vertices], P.dim, P.arith)


def combination(P: Polytope, t) -> Polytope:
    """(1-t)P - tP."""
    s = 1 - t
    return convex_hull([vsub(vscale(p, s), vscale(q, t)) for p in P.vertices for q in P.vertices],
                       P.dim, P.arith)


def width_profile(P: Polytope) -> List[Tuple[tuple, object]]:
    """(u, h(DP, u)) for every facet normal u of DP."""
    DP = difference_body(P)
    return [(f.normal, f.offset) for f in DP.facets]


# -------------------------------
# VOLUME POLYNOMIAL
# -------------------------------
@dataclass(frozen=True)
class VolumePolynomial:
    n: int
    coeffs: Tuple
    mixed_volumes: Tuple

    @property
    def volume(self):
        return self.coeffs[self.n]

    def evaluate(self, t):
        s = 1 - t
        return sum((c * s ** k * t ** (self.n - k) for k, c in enumerate(self.coeffs)), 0 * t)

    @property
    def integral(self):
        """Integral over [0,1] = (1/(n+1)) sum of the mixed volumes."""
        total = sum(self.mixed_volumes, 0 * self.coeffs[0])
        if isinstance(total, float):
            return total / (self.n + 1)
        return Fraction(total) / (self.n + 1)

    @property
    def difference_volume(self):
        """V_n(DP) = sum_k C(n,k) V(P[k], -P[n-k])."""
        return sum((comb(self.n, k) * m for k, m in enumerate(self.mixed_volumes)), 0 * self.coeffs[0])

    def reversed(self) -> "VolumePolynomial":
        return VolumePolynomial(self.n, tuple(reversed(self.coeffs)), tuple(reversed(self.mixed_volumes)))

    def to_json(self):
        return {
            "n": self.n,
            "coeffs": scalar_to_json(list(self.coeffs)),
            "mixed_volumes": scalar_to_json(list(self.mixed_volumes)),
            "integral": scalar_to_json(self.integral),
        }


def _bernstein_row(t, n):
    return [(1 - t) ** k * t ** (n - k) for k in range(n + 1)]


def _solve_exact(rows, values):
    M = sympy.Matrix([[sympy.Rational(a.numerator, a.denominator) for a in row] for row in rows])
    rhs = sympy.Matrix([sympy.Rational(v.numerator, v.denominator) for v in values])
    try:
        sol = M.LUsolve(rhs)
    except (ValueError, ZeroDivisionError) as e:
        raise SingularSystem(f"Bernstein system could not be solved: {e}")
    return [Fraction(int(r.p), int(r.q)) for r in sol]


def _solve_float(rows, values):
    try:
        return [float(c) for c in np.linalg.solve(np.array(rows, dtype=float), np.array(values, dtype=float))]
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"Bernstein system could not be solved: {e}")


def volume_polynomial(P: Polytope) -> VolumePolynomial:
    n = P.dim
    if n not in (2, 3):
        raise NotSupported(f"volume_polynomial needs dim 2 or 3 (got {n}); use simplex_volume_polynomial for simplices")
    exact = P.arith.exact
    nodes = [Fraction(k, n) if exact else k / n for k in range(n + 1)]
    base = volume(P)
    values = []
    for t in nodes:
        if t == 0 or t == 1:
            values.append(base)
        else:
            values.append(volume(combination(P, t)))
    rows = [_bernstein_row(t, n) for t in nodes]
    coeffs = _solve_exact(rows, values) if exact else _solve_float(rows, values)
    mixed = [c / comb(n, k) if not exact else Fraction(c) / comb(n, k) for k, c in enumerate(coeffs)]
    poly = VolumePolynomial(n, tuple(coeffs), tuple(mixed))
    if not P.arith.eq(poly.coeffs[0], base) or not P.arith.eq(poly.coeffs[n], base):
        raise SingularSystem(f"End coefficients {poly.coeffs[0]}, {poly.coeffs[n]} differ from V(P) = {base}")
    if any(P.arith.sign(m) < 0 for m in mixed):
        raise BoundViolated("Negative mixed volume")
    logging.info(f"Volume polynomial (dim {n}): coeffs {[str(c) for c in coeffs]}")
    return poly


def simplex_volume_polynomial(n: int, vol=Fraction(1)) -> VolumePolynomial:
    """
    Analytic volume polynomial of an n-simplex of volume ``vol``, any n >= 1:
    V(S[k], -S[n-k]) = C(n,k) V(S), hence c_k = C(n,k)^2 V(S).
    """
    if n < 1:
        raise NotSupported(f"Simplex dimension must be at least 1, got {n}")
    vol = Fraction(vol) if not isinstance(vol, float) else vol
    mixed = tuple(comb(n, k) * vol for k in range(n + 1))
    coeffs = tuple(comb(n, k) * m for k, m in enumerate(mixed))
    return VolumePolynomial(n, coeffs, mixed)


def integral_mixed(P) -> object:
    """
    Integral of V_n((1-t)P - tP) over [0,1]. Accepts a Polytope or an
    already computed VolumePolynomial.
    """
    poly = P if isinstance(P, VolumePolynomial) else volume_polynomial(P)
    return poly.integral


# -------------------------------
# ROGERS-SHEPHARD
# -------------------------------
@dataclass(frozen=True)
class RSReport:
    n: int
    volume: object
    integral: object
    lower_ok: bool
    upper_ok: bool
    lower_gap: object
    upper_gap: object

    def to_json(self):
        return {
            "n": self.n,
            "volume": scalar_to_json(self.volume),
            "integral": scalar_to_json(self.integral),
            "rs_lower_ok": self.lower_ok,
            "rs_upper_ok": self.upper_ok,
            "lower_gap": scalar_to_json(self.lower_gap),
            "upper_gap": scalar_to_json(self.upper_gap),
        }


def rogers_shephard_check(P: Polytope, poly: VolumePolynomial = None) -> RSReport:
    """V_n(P) <= integral <= 2^n/(n+1) V_n(P); raises BoundViolated otherwise."""
    poly = poly or volume_polynomial(P)
    n = poly.n
    vol = poly.volume
    integral = poly.integral
    upper = vol * 2 ** n / (n + 1) if not P.arith.exact else Fraction(vol) * 2 ** n / (n + 1)
    lower_gap = integral - vol
    upper_gap = upper - integral
    lower_ok = P.arith.sign(lower_gap, vol) >= 0
    upper_ok = P.arith.sign(upper_gap, vol) >= 0
    if not (lower_ok and upper_ok):
        raise BoundViolated(
            f"Rogers-Shephard bounds fail: V={vol}, integral={integral}, upper={upper}",
            lower_gap=scalar_to_json(lower_gap), upper_gap=scalar_to_json(upper_gap),
        )
    return RSReport(n, vol, integral, lower_ok, upper_ok, lower_gap, upper_gap)


def is_centrally_symmetric(P: Polytope) -> bool:
    c = P.vertex_centroid()
    mirrored = [vsub(vscale(c, 2), v) for v in P.vertices]
    return all(any(P.arith.eq_point(m, v) for v in P.vertices) for m in mirrored)

