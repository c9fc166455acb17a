"""
General and strongly general relative position.

P and -P are in general relative position when every facet F(DP,u) of the
difference body splits as F(P,u) + F(-P,u) with dim F(P,u) + dim F(-P,u) = n-1.
K and B are in strongly general relative position when
dim F(K,u) + dim F(B,u) = dim F(K+B,u) for every direction u; checking one
relative-interior normal per face of K+B is complete because the face
dimensions are constant on each open normal cone.

Both checks refuse float mode: a tolerance could flip a dimension count.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Tuple

from engine.errors import DimensionMismatch, ModeNotSupported
from engine.geom_core import Polytope, support_set
from engine.minkowski import difference_body, minkowski_sum
from engine.utils import scalar_to_json


@dataclass(frozen=True)
class Witness:
    u: Tuple
    dim_first: int     # dim F(P,u)  resp. dim F(K,u)
    dim_second: int    # dim F(-P,u) resp. dim F(B,u)
    dim_sum: int       # dim F(DP,u) resp. dim F(K+B,u)

    def to_json(self):
        return {
            "u": scalar_to_json(list(self.u)),
            "dims": [self.dim_first, self.dim_second, self.dim_sum],
        }


@dataclass(frozen=True)
class PositionReport:
    kind: str
    witnesses: Tuple[Witness, ...] = field(default_factory=tuple)
    checked: int = 0

    @property
    def holds(self) -> bool:
        return not self.witnesses

    def to_json(self):
        return {
            "check": self.kind,
            "holds": self.holds,
            "checked_directions": self.checked,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


def _require_exact(*bodies):
    for b in bodies:
        if not b.arith.exact:
            raise ModeNotSupported("Position checks need exact arithmetic; rerun with --mode exact")


def general_relative_position(P: Polytope) -> PositionReport:
    _require_exact(P)
    if P.dim not in (2, 3):
        raise DimensionMismatch(f"general_relative_position needs dim 2 or 3, got {P.dim}")
    DP = difference_body(P)
    n = P.dim
    witnesses: List[Witness] = []
    for facet in DP.facets:
        u = facet.normal
        plus = support_set(P, u).dim
        minus = support_set(P, tuple(-c for c in u)).dim
        if plus + minus != n - 1:
            witnesses.append(Witness(u, plus, minus, n - 1))
    report = PositionReport("general_relative_position", tuple(witnesses), len(DP.facets))
    logging.info(f"General position: {len(DP.facets)} facet normals of DP, {len(witnesses)} violations")
    return report


def strongly_general_relative_position(K: Polytope, B: Polytope) -> PositionReport:
    _require_exact(K, B)
    if K.dim != B.dim:
        raise DimensionMismatch(f"K has dim {K.dim} but B has dim {B.dim}")
    S = minkowski_sum(K, B)
    witnesses: List[Witness] = []
    checked = 0
    for r in range(S.dim):
        for face in S.faces(r):
            u = face.normal
            dk = support_set(K, u).dim
            db = support_set(B, u).dim
            checked += 1
            if dk + db != face.dim:
                witnesses.append(Witness(u, dk, db, face.dim))
    report = PositionReport("strongly_general_relative_position", tuple(witnesses), checked)
    logging.info(f"Strong general position: {checked} faces of K+B, {len(witnesses)} violations")
    return report
