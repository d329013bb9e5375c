"""A small dense two-phase simplex over exact rationals.

Solves ``maximize c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0``.
Bland's rule keeps it cycle-free; every quantity is a rational, so the
status of a problem never depends on rounding.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ._rational import ONE, ZERO, Q

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    x: Optional[list] = None
    value: Optional[object] = None


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.rows = rows      # list of coefficient lists
        self.rhs = rhs
        self.basis = basis

    def pivot(self, r, c):
        row = self.rows[r]
        inv = ONE / row[c]
        row = [v * inv for v in row]
        self.rows[r] = row
        self.rhs[r] *= inv
        for i, other in enumerate(self.rows):
            if i != r:
                f = other[c]
                if f != 0:
                    self.rows[i] = [a - f * b for a, b in zip(other, row)]
                    self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = c

    def optimize(self, cost, allowed):
        """Maximise ``cost.x`` over columns in ``allowed``; True if bounded."""
        while True:
            # reduced costs: cost_j - sum_i cost_basis_i * a_ij
            entering = None
            for j in allowed:
                if j in self.basis:
                    continue
                rc = cost[j]
                for i, bj in enumerate(self.basis):
                    cb = cost[bj]
                    if cb != 0:
                        rc -= cb * self.rows[i][j]
                if rc > 0:
                    entering = j
                    break
            if entering is None:
                return True
            leave, best = None, None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        leave, best = i, ratio
            if leave is None:
                return False
            self.pivot(leave, entering)

    def value(self, cost):
        return sum((cost[b] * self.rhs[i] for i, b in enumerate(self.basis)), ZERO)


def maximize(c, a_ub=(), b_ub=(), a_eq=(), b_eq=()) -> LPResult:
    n = len(c)
    m_ub, m_eq = len(a_ub), len(a_eq)
    n_slack = m_ub
    rows, rhs, basis = [], [], []
    artificial = []
    total = n + n_slack + m_ub + m_eq  # worst case: one artificial per row
    art_next = n + n_slack
    for i in range(m_ub):
        row = [Q(v) for v in a_ub[i]] + [ZERO] * (total - n)
        row[n + i] = ONE
        b = Q(b_ub[i])
        if b < 0:
            row = [-v for v in row]
            b = -b
            row[art_next] = ONE
            basis.append(art_next)
            artificial.append(art_next)
            art_next += 1
        else:
            basis.append(n + i)
        rows.append(row)
        rhs.append(b)
    for i in range(m_eq):
        row = [Q(v) for v in a_eq[i]] + [ZERO] * (total - n)
        b = Q(b_eq[i])
        if b < 0:
            row = [-v for v in row]
            b = -b
        row[art_next] = ONE
        basis.append(art_next)
        artificial.append(art_next)
        art_next += 1
        rows.append(row)
        rhs.append(b)
    width = art_next
    rows = [r[:width] for r in rows]
    t = _Tableau(rows, rhs, basis)
    real = list(range(n + n_slack))

    if artificial:
        phase1 = [ZERO] * width
        for j in artificial:
            phase1[j] = -ONE
        t.optimize(phase1, list(range(width)))
        if t.value(phase1) < 0:
            return LPResult(INFEASIBLE)
        art = set(artificial)
        keep = []
        for i, bj in enumerate(t.basis):
            if bj in art:
                col = next((j for j in real if t.rows[i][j] != 0), None)
                if col is None:
                    continue  # redundant row
                t.pivot(i, col)
            keep.append(i)
        t.rows = [t.rows[i] for i in keep]
        t.rhs = [t.rhs[i] for i in keep]
        t.basis = [t.basis[i] for i in keep]

    cost = [Q(v) for v in c] + [ZERO] * (width - n)
    if not t.optimize(cost, real):
        return LPResult(UNBOUNDED)
    x = [ZERO] * n
    for i, bj in enumerate(t.basis):
        if bj < n:
            x[bj] = t.rhs[i]
    return LPResult(OPTIMAL, x, t.value(cost))


def feasible(a_ub=(), b_ub=(), a_eq=(), b_eq=(), n=None) -> Optional[list]:
    """A feasible point, or ``None``."""
    if n is None:
        n = len((list(a_ub) + list(a_eq))[0])
    res = maximize([0] * n, a_ub, b_ub, a_eq, b_eq)
    return res.x if res.status == OPTIMAL else None
