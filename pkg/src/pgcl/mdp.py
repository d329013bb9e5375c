"""Exact least fixed points of minimising Bellman operators.

The loop functional of a strict loop whose body is loop-free is, per guard
state, a minimum over finitely many sub-distributions.  Its least fixed
point is the minimal expected exit value of a finite MDP, where
non-termination and abort mass count zero.  Solved by policy iteration in
exact rationals after removing the states whose minimal value is zero.
"""
from __future__ import annotations

from ._rational import ONE, ZERO


def zero_states(n, actions, exits) -> set:
    """Largest set from which the demon can avoid every positive exit."""
    z = set(actions) | {s for s, v in exits.items() if v == 0}
    changed = True
    while changed:
        changed = False
        for s in list(z):
            if s in exits:
                continue
            if not any(all(t in z for t, _ in d) for d in actions[s]):
                z.discard(s)
                changed = True
    return z


def solve_linear(a, b):
    """Solve ``a x = b`` for square nonsingular ``a`` by Gauss-Jordan."""
    n = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        m[col], m[piv] = m[piv], m[col]
        inv = ONE / m[col][col]
        prow = [v * inv for v in m[col]]
        m[col] = prow
        for r in range(n):
            if r != col:
                f = m[r][col]
                if f != 0:
                    row = m[r]
                    m[r] = [x - f * y for x, y in zip(row, prow)]
    return [m[i][n] for i in range(n)]


def _value(d, x):
    total = ZERO
    for t, p in d:
        total += p * x[t]
    return total


def solve_min_lfp(n, actions, exits):
    """Return ``(values, rounds)``.

    ``actions`` maps each guard state to a list of sub-distributions (lists
    of ``(state, mass)`` pairs); ``exits`` maps every other state to its
    fixed value.
    """
    z = zero_states(n, actions, exits)
    unknown = sorted(s for s in actions if s not in z)
    pos = {s: i for i, s in enumerate(unknown)}
    x = [ZERO] * n
    for s, v in exits.items():
        x[s] = v
    policy = {s: actions[s][0] for s in unknown}
    rounds = 0
    while True:
        rounds += 1
        k = len(unknown)
        a = [[ZERO] * k for _ in range(k)]
        b = [ZERO] * k
        for s in unknown:
            i = pos[s]
            a[i][i] += ONE
            for t, p in policy[s]:
                if t in pos:
                    a[i][pos[t]] -= p
                elif t in exits:
                    b[i] += p * exits[t]
        sol = solve_linear(a, b) if k else []
        for s in unknown:
            x[s] = sol[pos[s]]
        changed = False
        for s in unknown:
            current = _value(policy[s], x)
            for d in actions[s]:
                if _value(d, x) < current:
                    policy[s] = d
                    current = _value(d, x)
                    changed = True
        if not changed:
            return x, rounds


def bellman_min(n, actions, exits, x):
    out = [ZERO] * n
    for s in range(n):
        if s in exits:
            out[s] = exits[s]
        else:
            out[s] = min(_value(d, x) for d in actions[s])
    return out
