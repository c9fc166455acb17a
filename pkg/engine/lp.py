"""
Small dense linear programs in standard form

    minimise  c.x   subject to  A x = b,  x >= 0

by the two-phase tableau simplex method with Bland's rule. In exact mode
the tableau holds Fractions, so the optimum, the primal solution and the
dual bound read off the final tableau are exact.
"""
import copy
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

from engine.errors import DualityGap, Infeasible, Unbounded
from engine.geom_core import EXACT, Arithmetic


class _Tableau:
    """Rows of [A | artificial identity | rhs] with the current basis."""

    def __init__(self, A, b, arith: Arithmetic):
        self.arith = arith
        self.m = len(A)
        self.n = len(A[0]) if A else 0
        zero = Fraction(0) if arith.exact else 0.0
        one = Fraction(1) if arith.exact else 1.0
        self.row_sign = []
        self.rows = []
        for i, (row, rhs) in enumerate(zip(A, b)):
            s = -1 if rhs < 0 else 1
            self.row_sign.append(s)
            art = [zero] * self.m
            art[i] = one
            self.rows.append([s * a for a in row] + art + [s * rhs])
        self.basis = [self.n + i for i in range(self.m)]
        self.cost = [zero] * (self.n + self.m)

    @property
    def width(self):
        return self.n + self.m

    def reduced_cost(self, j):
        return self.cost[j] - sum(self.cost[self.basis[i]] * self.rows[i][j] for i in range(self.m))

    def objective(self):
        return sum(self.cost[self.basis[i]] * self.rows[i][-1] for i in range(self.m))

    def pivot(self, r, j):
        pv = self.rows[r][j]
        self.rows[r] = [a / pv for a in self.rows[r]]
        for i in range(self.m):
            if i != r and self.rows[i][j] != 0:
                f = self.rows[i][j]
                self.rows[i] = [a - f * p for a, p in zip(self.rows[i], self.rows[r])]
        self.basis[r] = j

    def entering(self, allowed):
        # Bland: lowest index with negative reduced cost
        for j in allowed:
            if j in self.basis:
                continue
            if self.arith.sign(self.reduced_cost(j)) < 0:
                return j
        return None

    def leaving(self, j):
        # minimum ratio, ties to the lowest basic index
        best = None
        for i in range(self.m):
            a = self.rows[i][j]
            if self.arith.sign(a) <= 0:
                continue
            ratio = self.rows[i][-1] / a
            if best is None:
                best = (ratio, i)
                continue
            s = self.arith.sign(ratio - best[0])
            if s < 0 or (s == 0 and self.basis[i] < self.basis[best[1]]):
                best = (ratio, i)
        return None if best is None else best[1]

    def run(self, allowed):
        iterations = 0
        while True:
            j = self.entering(allowed)
            if j is None:
                return iterations
            r = self.leaving(j)
            if r is None:
                raise Unbounded(f"Objective unbounded along column {j}")
            self.pivot(r, j)
            iterations += 1

    def primal(self):
        zero = Fraction(0) if self.arith.exact else 0.0
        x = [zero] * self.n
        for i, j in enumerate(self.basis):
            if j < self.n:
                x[j] = self.rows[i][-1]
        return x

    def duals(self):
        """y with y.A_j <= c_j; read from the artificial columns (B^-1)."""
        y = []
        for i in range(self.m):
            col = self.n + i
            yi = sum(self.cost[self.basis[k]] * self.rows[k][col] for k in range(self.m))
            y.append(self.row_sign[i] * yi)
        return y


@dataclass
class LPResult:
    value: object
    x: List
    duals: List
    dual_bound: object
    iterations: int
    tableau: _Tableau

    def alternative_solutions(self, limit: int = 200) -> List[List]:
        """
        Primal vertices of the optimal face reachable by pivots on columns
        with zero reduced cost (breadth first, at most ``limit`` bases).
        """
        arith = self.tableau.arith
        structural = range(self.tableau.n)
        seen = {tuple(self.tableau.basis)}
        queue = [self.tableau]
        found = [self.x]
        while queue and len(seen) < limit:
            tab = queue.pop(0)
            for j in structural:
                if j in tab.basis or arith.sign(tab.reduced_cost(j)) != 0:
                    continue
                r = tab.leaving(j)
                if r is None:
                    continue
                nxt = copy.deepcopy(tab)
                nxt.pivot(r, j)
                key = tuple(nxt.basis)
                if key in seen:
                    continue
                seen.add(key)
                queue.append(nxt)
                x = nxt.primal()
                if not any(all(arith.eq(a, b) for a, b in zip(x, y)) for y in found):
                    found.append(x)
        return found


def solve_lp(c: Sequence, A: Sequence[Sequence], b: Sequence,
             arith: Optional[Arithmetic] = None) -> LPResult:
    """
    Solve min c.x s.t. A x = b, x >= 0.

    Raises Infeasible when phase one ends with a positive artificial sum and
    Unbounded when an entering column has no positive entry.
    """
    arith = arith or EXACT
    c = [arith.coerce(v) for v in c]
    A = [[arith.coerce(v) for v in row] for row in A]
    b = [arith.coerce(v) for v in b]
    tab = _Tableau(A, b, arith)
    n, m = tab.n, tab.m

    # phase one: minimise the sum of artificials
    one = Fraction(1) if arith.exact else 1.0
    tab.cost = [0 * one] * n + [one] * m
    it1 = tab.run(range(tab.width))
    if arith.sign(tab.objective()) > 0:
        raise Infeasible(f"No feasible point (phase one residual {tab.objective()})")

    # drive zero-level artificials out of the basis where a structural pivot exists
    for r in range(m):
        if tab.basis[r] >= n:
            for j in range(n):
                if j not in tab.basis and not arith.is_zero(tab.rows[r][j]):
                    tab.pivot(r, j)
                    break

    # phase two: artificials may no longer enter
    tab.cost = list(c) + [0 * one] * m
    it2 = tab.run(range(n))
    value = tab.objective()
    y = tab.duals()
    bound = sum((bi * yi for bi, yi in zip(b, y)), 0 * one)
    if not arith.eq(value, bound):
        raise DualityGap(f"Primal optimum {value} differs from dual bound {bound}")
    logging.debug(f"LP solved: {m} rows, {n} columns, {it1 + it2} pivots, value {value}")
    return LPResult(value, tab.primal(), y, bound, it1 + it2, tab)


def hull_membership(vertices, z, arith: Optional[Arithmetic] = None):
    """
    Barycentric weights of z in conv(vertices), or None when z is outside.
    """
    arith = arith or EXACT
    k = len(vertices)
    dim = len(z)
    A = [[v[d] for v in vertices] for d in range(dim)] + [[1] * k]
    b = list(z) + [1]
    try:
        res = solve_lp([0] * k, A, b, arith)
    except Infeasible:
        return None
    return res.x
