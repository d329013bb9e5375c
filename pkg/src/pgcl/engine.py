"""Backward semantics: weakest (liberal) pre-expectations.

Programs are compiled once per state space into closures over rank-indexed
vectors.  Invalid behaviour (out-of-range probability, assignment outside
a domain, empty demonic set) compiles to a poison value at the offending
state; poison is discarded when weighted by zero and reported only if it
reaches the final pre-expectation, so errors fire exactly at reachable
states.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import _rational
from ._rational import ONE, ZERO, to_fraction, to_q
from .errors import SemanticError
from .model import Expectation, Predicate, StateSpace
from .syntax import (
    DC, PC, Abort, Apply, Exec, If, Label, Loop, NondetRelation, Seq, SetDC,
    Skip, eval_bool, eval_int, eval_num, eval_set, pretty_expr,
)

log = logging.getLogger(__name__)

STRICT = True
LIBERAL = False


@dataclass(frozen=True)
class FixpointConfig:
    tolerance: Fraction = Fraction(1, 10**9)
    max_iter: int = 100_000
    exact: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tolerance", Fraction(self.tolerance))
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


DEFAULT_CONFIG = FixpointConfig()


@dataclass
class FixpointResult:
    value: Expectation
    iterations: int
    converged: bool
    residual: Fraction
    direction: str  # "ascending" (lfp) or "descending" (gfp)
    method: str = "iteration"


class Bad:
    """Poison marker carried in place of a value."""

    __slots__ = ("reason",)

    def __init__(self, reason: str):
        self.reason = reason

    def __repr__(self):
        return f"Bad({self.reason!r})"


def _is_bad(v) -> bool:
    return v.__class__ is Bad


def _bound(values):
    best = None
    for v in values:
        if v.__class__ is not Bad and (best is None or v > best):
            best = v
    return best if best is not None else Bad("bound of an undefined expectation")


def _min2(a, b):
    if a.__class__ is Bad:
        return a
    if b.__class__ is Bad:
        return b
    return a if a <= b else b


def _mix(p, a, b):
    # p*a + (1-p)*b where a zero-weighted poison is dropped
    if p == ONE:
        return a
    if p == ZERO:
        return b
    if a.__class__ is Bad:
        return a
    if b.__class__ is Bad:
        return b
    return p * a + (ONE - p) * b


class _Context:
    __slots__ = ("cfg", "trace")

    def __init__(self, cfg, trace):
        self.cfg = cfg
        self.trace = trace


# -- compilation -----------------------------------------------------------

_cache: dict = {}


def compile_program(prog, space: StateSpace):
    """Return ``run(post_values, ab, ctx) -> values`` for ``prog`` on ``space``."""
    key = (prog, space)
    fn = _cache.get(key)
    if fn is None:
        fn = _compile(prog, space)
        if len(_cache) > 4096:
            _cache.clear()
        _cache[key] = fn
    return fn


def _prob_vector(expr, space):
    out = []
    for env in space.bindings:
        p = eval_num(expr, env)
        if 0 <= p <= 1:
            out.append(to_q(p))
        else:
            out.append(Bad(f"probability {pretty_expr(expr)} = {p} outside [0,1] at "
                           f"{space.format_state(tuple(env.values()))}"))
    return out


def _guard_vector(expr, space):
    return [eval_bool(expr, env) for env in space.bindings]


def _target(space, state, var, value):
    if value not in space.domains[var]:
        return Bad(f"{var} := {value} leaves the domain of {var} at {space.format_state(state)}")
    return space.index(space.update(state, var, value))


def _compile(prog, space):
    t = type(prog)
    n = space.size

    if t is Skip:
        return lambda post, ab, ctx: post

    if t is Abort:
        def run_abort(post, ab, ctx):
            if ab:
                return [ZERO] * n
            return [_bound(post)] * n
        return run_abort

    if t is Label:
        return compile_program(prog.body, space)

    if t is Apply:
        targets = []
        for s, env in zip(space.states, space.bindings):
            try:
                targets.append(_target(space, s, prog.var, eval_int(prog.expr, env)))
            except SemanticError as e:
                targets.append(Bad(str(e)))

        def run_apply(post, ab, ctx):
            return [post[j] if j.__class__ is int else j for j in targets]
        return run_apply

    if t is SetDC:
        choices = []
        for s, env in zip(space.states, space.bindings):
            try:
                values = eval_set(prog.set, env)
            except SemanticError as e:
                choices.append(Bad(str(e)))
                continue
            if not values:
                choices.append(Bad(f"empty choice set {pretty_expr(prog.set)} at {space.format_state(s)}"))
                continue
            choices.append([_target(space, s, prog.var, v) for v in sorted(values)])

        def run_setdc(post, ab, ctx):
            out = []
            for opts in choices:
                if opts.__class__ is Bad:
                    out.append(opts)
                    continue
                best = None
                for j in opts:
                    v = post[j] if j.__class__ is int else j
                    best = v if best is None else _min2(best, v)
                out.append(best)
            return out
        return run_setdc

    if t is Seq:
        a = compile_program(prog.first, space)
        b = compile_program(prog.second, space)
        return lambda post, ab, ctx: a(b(post, ab, ctx), ab, ctx)

    if t is DC:
        a = compile_program(prog.left, space)
        b = compile_program(prog.right, space)
        return lambda post, ab, ctx: list(map(_min2, a(post, ab, ctx), b(post, ab, ctx)))

    if t is PC:
        a = compile_program(prog.left, space)
        b = compile_program(prog.right, space)
        probs = _prob_vector(prog.prob, space)

        def run_pc(post, ab, ctx):
            xs, ys = a(post, ab, ctx), b(post, ab, ctx)
            return [p if p.__class__ is Bad else _mix(p, x, y) for p, x, y in zip(probs, xs, ys)]
        return run_pc

    if t is If:
        a = compile_program(prog.then, space)
        b = compile_program(prog.orelse, space)
        guard = _guard_vector(prog.guard, space)

        def run_if(post, ab, ctx):
            xs, ys = a(post, ab, ctx), b(post, ab, ctx)
            return [x if g else y for g, x, y in zip(guard, xs, ys)]
        return run_if

    if t is Exec:
        rel = prog.relation
        if rel.space != space:
            raise SemanticError("Exec relation is defined over a different state space")
        rows = rel.successors

        def run_exec(post, ab, ctx):
            bound = None
            out = []
            for succ, failed in rows:
                if failed:
                    if ab:
                        out.append(ZERO)
                        continue
                if failed or not succ:
                    if bound is None:
                        bound = _bound(post)
                    out.append(bound)
                    continue
                best = None
                for j in succ:
                    best = post[j] if best is None else _min2(best, post[j])
                out.append(best)
            return out
        return run_exec

    if t is Loop:
        guard = _guard_vector(prog.guard, space)
        body = compile_program(prog.body, space)

        def run_loop(post, ab, ctx):
            res = _iterate(prog, space, guard, body, post, ab, ctx)
            if ctx.trace is not None:
                ctx.trace.append(res)
            return res[0]
        return run_loop

    raise TypeError(f"not a program: {prog!r}")


# -- loops -----------------------------------------------------------------


def _residual(xs, ys):
    r = ZERO
    for x, y in zip(xs, ys):
        if x.__class__ is Bad or y.__class__ is Bad:
            continue
        d = x - y if x >= y else y - x
        if d > r:
            r = d
    return r


def _iterate(prog, space, guard, body, post, ab, ctx):
    """Kleene iteration of ``X -> [G]*body(X) + [!G]*post``.

    The zeroth iterate is one unrolling from the bottom (strict) or from the
    surrogate top ``bound_of(post)`` (liberal).  Returns
    ``(values, iterations, converged, residual, direction, method)``.
    """
    cfg = ctx.cfg
    def step(x):
        bx = body(x, ab, ctx)
        return [b if g else p for g, b, p in zip(guard, bx, post)]

    if ab and cfg.exact:
        exact = _exact_lfp(prog, space, guard, post, ctx)
        if exact is not None:
            values, rounds = exact
            if step(values) != values:  # pragma: no cover - solver invariant
                raise AssertionError("policy iteration returned a non-fixed point")
            return values, rounds, True, ZERO, "ascending", "policy-iteration"

    if ab:
        start = [ZERO] * space.size
    else:
        start = [_bound(post)] * space.size
    x = step(start)
    tol = to_q(cfg.tolerance)
    residual = ZERO
    for k in range(1, cfg.max_iter + 1):
        nxt = step(x)
        residual = _residual(nxt, x)
        x = nxt
        if residual <= tol:
            return x, k, True, residual, ("ascending" if ab else "descending"), "iteration"
    return x, cfg.max_iter, False, residual, ("ascending" if ab else "descending"), "iteration"


def _exact_lfp(prog, space, guard, post, ctx):
    """Least fixed point by policy iteration, or ``None`` when the body is
    outside what the forward oracle can enumerate."""
    from .errors import UnsupportedProgram
    from .forward import ResolutionLimit, body_actions
    from .mdp import solve_min_lfp

    try:
        actions = body_actions(prog.body, space, [i for i, g in enumerate(guard) if g])
    except (UnsupportedProgram, ResolutionLimit) as e:
        log.info("exact mode unavailable for loop, iterating instead: %s", e)
        return None
    exits = {}
    for i, g in enumerate(guard):
        if not g:
            if _is_bad(post[i]):
                return None
            exits[i] = post[i]
    return solve_min_lfp(space.size, actions, exits)


# -- public API ------------------------------------------------------------


def _check_space(prog, post):
    if not isinstance(post, Expectation):
        raise TypeError("post must be an Expectation")


def _finish(space, values) -> Expectation:
    for s, v in zip(space.states, values):
        if _is_bad(v):
            raise SemanticError(v.reason)
    return Expectation(space, [to_fraction(v) for v in values])


def transform(prog, flag: bool, post: Expectation, cfg: FixpointConfig = DEFAULT_CONFIG,
              trace: Optional[list] = None) -> Expectation:
    """Evaluate ``prog`` backwards against ``post``.

    ``flag`` is True for strict semantics (wp) and False for liberal (wlp).
    When ``trace`` is a list, every loop evaluation appends its raw result
    tuple ``(values, iterations, converged, residual, direction, method)``.
    """
    _check_space(prog, post)
    space = post.space
    run = compile_program(prog, space)
    values = run([to_q(v) for v in post.values], bool(flag), _Context(cfg, trace))
    return _finish(space, values)


def transform_values(prog, flag: bool, space: StateSpace, values, cfg: FixpointConfig = DEFAULT_CONFIG):
    """Kernel entry point on raw backend rationals, skipping the conversions
    of ``transform``.  ``values`` must already be backend rationals."""
    out = compile_program(prog, space)(values, bool(flag), _Context(cfg, None))
    for v in out:
        if v.__class__ is Bad:
            raise SemanticError(v.reason)
    return out


def wp(prog, post: Expectation, cfg: FixpointConfig = DEFAULT_CONFIG) -> Expectation:
    return transform(prog, STRICT, post, cfg)


def wlp(prog, post: Expectation, cfg: FixpointConfig = DEFAULT_CONFIG) -> Expectation:
    return transform(prog, LIBERAL, post, cfg)


def loop_fixpoint(guard, body, flag: bool, post: Expectation,
                  cfg: FixpointConfig = DEFAULT_CONFIG) -> FixpointResult:
    space = post.space
    loop = Loop(guard, body)
    trace: list = []
    transform(loop, flag, post, cfg, trace)
    values, iterations, converged, residual, direction, method = trace[-1]
    return FixpointResult(
        value=_finish(space, values),
        iterations=iterations,
        converged=converged,
        residual=to_fraction(residual),
        direction=direction,
        method=method,
    )


def lift_exec(rel: NondetRelation, name: str = "exec") -> Exec:
    return Exec(rel, name)


def expectation_of(expr, space: StateSpace) -> Expectation:
    """Evaluate a numeric expression at every state as an expectation."""
    vals = [eval_num(expr, env) for env in space.bindings]
    for s, v in zip(space.states, vals):
        if v < 0:
            raise SemanticError(f"{pretty_expr(expr)} is negative ({v}) at {space.format_state(s)}")
    return Expectation(space, vals)


def predicate_of(expr, space: StateSpace) -> Predicate:
    return Predicate(space, _guard_vector(expr, space))


def backend() -> str:
    return _rational.BACKEND
