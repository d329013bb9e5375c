"""Forward semantics: a program maps an initial state to the set of
sub-distributions the demon can produce.

This is the independent route to wp: ``oracle_wp`` takes the minimal
expected value over the resolution set and never consults the backward
engine.  Exact refinement is decided per initial state with an exact LP.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import lp
from ._rational import ONE, ZERO, to_fraction, to_q
from .engine import DEFAULT_CONFIG, FixpointConfig, transform
from .errors import SemanticError, SpaceMismatch, UnsupportedProgram
from .model import Expectation, StateSpace
from .syntax import (
    DC, PC, Abort, Apply, Exec, If, Label, Loop, Seq, SetDC, Skip, eval_bool,
    eval_int, eval_num, eval_set, has_loops, pretty_expr,
)

MAX_RESOLUTIONS = 50_000
HULL_THRESHOLD = 16  # sets larger than this also get convex-hull pruning


class ResolutionLimit(UnsupportedProgram):
    pass


class SubDistribution:
    """Mass on final states, by rank; total mass at most one."""

    __slots__ = ("space", "mass", "_total", "_hash")

    def __init__(self, space: StateSpace, mass):
        self.space = space
        self.mass = tuple(sorted((t, m) for t, m in mass if m != 0))
        self._total = None
        self._hash = None

    @classmethod
    def dirac(cls, space, rank):
        return cls(space, ((rank, ONE),))

    @classmethod
    def zero(cls, space):
        return cls(space, ())

    def total(self):
        if self._total is None:
            self._total = sum((m for _, m in self.mass), ZERO)
        return self._total

    def expect(self, values) -> object:
        """Expected value of a rank-indexed vector."""
        return sum((m * values[t] for t, m in self.mass), ZERO)

    def dominates(self, other: "SubDistribution") -> bool:
        mine = dict(self.mass)
        return all(mine.get(t, ZERO) >= m for t, m in other.mass)

    def as_dict(self) -> dict:
        states = self.space.states
        return {states[t]: to_fraction(m) for t, m in self.mass}

    def __eq__(self, other):
        return isinstance(other, SubDistribution) and self.mass == other.mass

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.mass)
        return self._hash

    def __repr__(self):
        fmt = self.space.format_state
        inner = ", ".join(f"{fmt(s)}: {m}" for s, m in self.as_dict().items())
        return f"SubDistribution({{{inner}}})"


def prune(dists) -> list:
    """Deduplicate and drop every distribution that dominates another.

    A dominating distribution never attains the minimum expected value of a
    nonnegative post-expectation, and among equal totals domination implies
    equality, so candidates only need comparing against lighter ones.
    """
    unique = sorted(set(dists), key=lambda d: (d.total(), d.mass))
    kept = []
    for d in unique:
        tot = d.total()
        if any(k.total() < tot and d.dominates(k) for k in kept):
            continue
        kept.append(d)
    if len(kept) > HULL_THRESHOLD:
        kept = hull_prune(kept)
    return kept


def hull_prune(dists) -> list:
    """Drop distributions that dominate a convex combination of others.

    Minima of nonnegative linear functionals are unchanged.  Unique
    minimisers of random probe posts are hull vertices and are kept without
    an LP; every other point is tested against the points kept so far, then
    once more against the final set.  Keeping a redundant point is harmless.
    """
    n = len(dists)
    rng = random.Random(n)
    # probes only decide what skips the LP, never what is removed, so float
    # rounding can at worst keep a redundant point
    approx = [[(t, float(m)) for t, m in d.mass] for d in dists]
    support = sorted({t for d in dists for t, _ in d.mass})
    vertex = set()
    for _ in range(min(2 * n, 128)):
        q = {t: rng.random() for t in support}
        vals = [sum(m * q[t] for t, m in d) for d in approx]
        lo = min(vals)
        hits = [i for i, v in enumerate(vals) if v - lo <= 1e-12]
        if len(hits) == 1:
            vertex.add(hits[0])
    kept = [dists[i] for i in sorted(vertex)]
    tentative = []
    for i in range(n):
        if i in vertex:
            continue
        if kept and _dominated_by_hull(kept, dists[i]):
            continue
        kept.append(dists[i])
        tentative.append(dists[i])
    for d in tentative:
        others = [k for k in kept if k is not d]
        if others and _dominated_by_hull(others, d):
            kept.remove(d)
    return kept


def _add_scaled(acc: dict, d, w):
    for t, m in d.mass:
        acc[t] = acc.get(t, ZERO) + w * m


class _Resolver:
    def __init__(self, space: StateSpace, limit: int):
        self.space = space
        self.limit = limit
        self.memo = {}

    def check(self, n):
        if n > self.limit:
            raise ResolutionLimit(f"more than {self.limit} demonic resolutions")

    def run(self, prog, rank) -> list:
        key = (id(prog), rank)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[1]
        out = self._run(prog, rank)
        self.memo[key] = (prog, out)
        return out

    def _run(self, prog, rank):
        space = self.space
        t = type(prog)
        s = space.states[rank]
        env = space.bindings[rank]
        if t is Skip:
            return [SubDistribution.dirac(space, rank)]
        if t is Abort:
            return [SubDistribution.zero(space)]
        if t is Label:
            return self.run(prog.body, rank)
        if t is Apply:
            return [SubDistribution.dirac(space, self._assign(s, prog.var, eval_int(prog.expr, env)))]
        if t is SetDC:
            values = eval_set(prog.set, env)
            if not values:
                raise SemanticError(f"empty choice set {pretty_expr(prog.set)} at {space.format_state(s)}")
            return prune(SubDistribution.dirac(space, self._assign(s, prog.var, v)) for v in values)
        if t is DC:
            out = prune(self.run(prog.left, rank) + self.run(prog.right, rank))
            self.check(len(out))
            return out
        if t is If:
            branch = prog.then if eval_bool(prog.guard, env) else prog.orelse
            return self.run(branch, rank)
        if t is PC:
            p = eval_num(prog.prob, env)
            if not 0 <= p <= 1:
                raise SemanticError(f"probability {pretty_expr(prog.prob)} = {p} outside [0,1] "
                                    f"at {space.format_state(s)}")
            if p == 1:
                return self.run(prog.left, rank)
            if p == 0:
                return self.run(prog.right, rank)
            pq = to_q(p)
            lefts, rights = self.run(prog.left, rank), self.run(prog.right, rank)
            self.check(len(lefts) * len(rights))
            out = []
            for a in lefts:
                for b in rights:
                    acc: dict = {}
                    _add_scaled(acc, a, pq)
                    _add_scaled(acc, b, ONE - pq)
                    out.append(SubDistribution(space, acc.items()))
            return prune(out)
        if t is Seq:
            out = []
            for first in self.run(prog.first, rank):
                partials = [((), {})]
                for mid, w in first.mass:
                    options = self.run(prog.second, mid)
                    self.check(len(partials) * len(options))
                    nxt = []
                    for _, acc in partials:
                        for d in options:
                            acc2 = dict(acc)
                            _add_scaled(acc2, d, w)
                            nxt.append(SubDistribution(space, acc2.items()))
                    partials = [(None, dict(d.mass)) for d in prune(nxt)]
                out.extend(SubDistribution(space, acc.items()) for _, acc in partials)
                self.check(len(out))
            return prune(out)
        if t is Exec:
            succ, failed = prog.relation.successors[rank]
            if failed:
                return [SubDistribution.zero(space)]
            if not succ:
                raise UnsupportedProgram("a stuck Exec state has no distributional meaning")
            return [SubDistribution.dirac(space, j) for j in sorted(succ)]
        if t is Loop:
            raise UnsupportedProgram("the forward oracle handles loop-free programs only")
        raise TypeError(f"not a program: {prog!r}")

    def _assign(self, s, var, value):
        space = self.space
        if value not in space.domains[var]:
            raise SemanticError(f"{var} := {value} leaves the domain of {var} at {space.format_state(s)}")
        return space.index(space.update(s, var, value))


def resolutions(prog, space: StateSpace, state, limit: int = MAX_RESOLUTIONS) -> frozenset:
    """Minimal resolution set of ``prog`` from ``state``."""
    return frozenset(_Resolver(space, limit).run(prog, space.index(state)))


_all_cache: dict = {}


def all_resolutions(prog, space: StateSpace, limit: int = MAX_RESOLUTIONS) -> list:
    """Resolution lists for every initial state, by rank, with a shared memo.

    Results are cached per (program, space): both are immutable."""
    key = (prog, space, limit)
    rows = _all_cache.get(key)
    if rows is None:
        r = _Resolver(space, limit)
        rows = tuple(tuple(r.run(prog, i)) for i in range(space.size))
        if len(_all_cache) > 256:
            _all_cache.clear()
        _all_cache[key] = rows
    return list(rows)


def body_actions(body, space: StateSpace, ranks, limit: int = MAX_RESOLUTIONS) -> dict:
    """Per-state action lists for a loop body, as ``(rank, mass)`` pairs."""
    if has_loops(body):
        raise UnsupportedProgram("nested loop in body")
    r = _Resolver(space, limit)
    return {i: [list(d.mass) for d in r.run(body, i)] for i in ranks}


def oracle_wp(prog, post: Expectation, state) -> Fraction:
    space = post.space
    ds = resolutions(prog, space, state)
    vals = [to_q(v) for v in post.values]
    return to_fraction(min(d.expect(vals) for d in ds))


def oracle_wp_all(prog, post: Expectation) -> Expectation:
    space = post.space
    vals = [to_q(v) for v in post.values]
    rows = all_resolutions(prog, space)
    return Expectation(space, [to_fraction(min(d.expect(vals) for d in ds)) for ds in rows])


# -- refinement ------------------------------------------------------------


@dataclass
class Counterexample:
    state: tuple
    post: Expectation
    lhs: Fraction  # wp(a)(post)(state)
    rhs: Fraction  # wp(b)(post)(state)


@dataclass
class RefinementVerdict:
    holds: bool
    counterexample: Optional[Counterexample] = None
    checked: int = 0


def _same_space(space_a, space_b):
    if space_a != space_b:
        raise SpaceMismatch("programs are declared over different state spaces")


def _dominated_by_hull(candidates, target) -> bool:
    """Is ``target`` >= some convex combination of ``candidates``?"""
    if any(target.dominates(c) for c in candidates):
        return True
    support = sorted({t for c in candidates for t, _ in c.mass} | {t for t, _ in target.mass})
    tgt = dict(target.mass)
    cols = [dict(c.mass) for c in candidates]
    a_ub = [[c.get(t, ZERO) for c in cols] for t in support]
    b_ub = [tgt.get(t, ZERO) for t in support]
    a_eq = [[ONE] * len(cols)]
    return lp.feasible(a_ub, b_ub, a_eq, [ONE], n=len(cols)) is not None


def _separating_post(space, candidates, target) -> Expectation:
    """A post in [0,1] with min over candidates > target's expectation.

    maximize v - target.Q  s.t.  v <= c.Q for each candidate, Q <= 1.
    """
    support = sorted({t for c in candidates for t, _ in c.mass} | {t for t, _ in target.mass})
    k = len(support)
    tgt = dict(target.mass)
    cost = [-tgt.get(t, ZERO) for t in support] + [ONE]
    a_ub = []
    for c in candidates:
        cm = dict(c.mass)
        a_ub.append([-cm.get(t, ZERO) for t in support] + [ONE])
    b_ub = [ZERO] * len(candidates)
    for i in range(k):
        row = [ZERO] * (k + 1)
        row[i] = ONE
        a_ub.append(row)
        b_ub.append(ONE)
    res = lp.maximize(cost, a_ub, b_ub)
    assert res.status == lp.OPTIMAL and res.value > 0
    values = [Fraction(0)] * space.size
    for t, q in zip(support, res.x[:k]):
        values[t] = to_fraction(q)
    return Expectation(space, values)


def refines_exact(a, b, space: StateSpace, space_b: StateSpace | None = None) -> RefinementVerdict:
    """Decide ``wp a Q <= wp b Q`` for every sound ``Q`` (``b`` refines ``a``)."""
    if space_b is not None:
        _same_space(space, space_b)
    if has_loops(a) or has_loops(b):
        raise UnsupportedProgram("exact refinement needs loop-free programs")
    ra, rb = all_resolutions(a, space), all_resolutions(b, space)
    checked = 0
    for rank, (da, db) in enumerate(zip(ra, rb)):
        for d in db:
            checked += 1
            if _dominated_by_hull(da, d):
                continue
            post = _separating_post(space, da, d)
            vals = [to_q(v) for v in post.values]
            lhs = min(x.expect(vals) for x in da)
            rhs = min(x.expect(vals) for x in db)
            cex = Counterexample(space.states[rank], post, to_fraction(lhs), to_fraction(rhs))
            return RefinementVerdict(False, cex, checked)
    return RefinementVerdict(True, None, checked)


LATTICE = tuple(Fraction(k, 4) for k in range(5))


def random_expectation(space: StateSpace, rng: random.Random, lattice=LATTICE) -> Expectation:
    return Expectation(space, [rng.choice(lattice) for _ in range(space.size)])


def refines_falsify(a, b, space: StateSpace, samples: int = 100, seed: int = 0,
                    cfg: FixpointConfig = DEFAULT_CONFIG, extra_posts=(),
                    space_b: StateSpace | None = None) -> RefinementVerdict:
    """Search for a post and state with ``wp a Q > wp b Q``.

    ``holds=True`` means only that no counterexample was found.
    """
    if space_b is not None:
        _same_space(space, space_b)
    rng = random.Random(seed)
    slack = Fraction(0)
    if (has_loops(a) or has_loops(b)) and not cfg.exact:
        slack = 2 * cfg.tolerance

    def candidates():
        yield from extra_posts
        for s in space.states:
            yield Expectation.indicator(space, s)
        for _ in range(samples):
            yield random_expectation(space, rng)

    checked = 0
    for post in candidates():
        checked += 1
        wa = transform(a, True, post, cfg)
        wb = transform(b, True, post, cfg)
        for s, x, y in zip(space.states, wa.values, wb.values):
            if x > y + slack:
                return RefinementVerdict(False, Counterexample(s, post, x, y), checked)
    return RefinementVerdict(True, None, checked)
