"""Abstract syntax for pGCL programs and the expressions inside them.

All nodes are frozen dataclasses, so structural equality is ``==``.  Source
locations ride along in ``loc`` and are ignored by comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import SemanticError

# -- numeric expressions (arithmetic, probabilities, expectations) ---------


@dataclass(frozen=True)
class Num:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Var:
    name: str
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: object
    right: object


@dataclass(frozen=True)
class Iverson:
    """``[b]``: 1 where the condition holds, 0 elsewhere."""
    cond: object


# -- boolean expressions ---------------------------------------------------


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # = != < <= > >=
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    operand: object


@dataclass(frozen=True)
class BoolOp:
    op: str  # '&' or '|'
    left: object
    right: object


@dataclass(frozen=True)
class In:
    elem: object
    set: object


# -- set expressions -------------------------------------------------------


@dataclass(frozen=True)
class SetLit:
    items: tuple


@dataclass(frozen=True)
class SetDiff:
    left: object
    right: object


_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_num(e, env) -> Fraction:
    t = type(e)
    if t is Num:
        return e.value
    if t is Var:
        return Fraction(env[e.name])
    if t is BinOp:
        a, b = eval_num(e.left, env), eval_num(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        return a * b
    if t is Neg:
        return -eval_num(e.operand, env)
    if t is Iverson:
        return Fraction(1) if eval_bool(e.cond, env) else Fraction(0)
    raise TypeError(f"not a numeric expression: {e!r}")


def eval_int(e, env) -> int:
    v = eval_num(e, env)
    if v.denominator != 1:
        raise SemanticError(f"{pretty_expr(e)} evaluates to non-integer {v}")
    return int(v)


def eval_bool(e, env) -> bool:
    t = type(e)
    if t is BoolConst:
        return e.value
    if t is Cmp:
        return _CMP[e.op](eval_num(e.left, env), eval_num(e.right, env))
    if t is Not:
        return not eval_bool(e.operand, env)
    if t is BoolOp:
        if e.op == "&":
            return eval_bool(e.left, env) and eval_bool(e.right, env)
        return eval_bool(e.left, env) or eval_bool(e.right, env)
    if t is In:
        return eval_int(e.elem, env) in eval_set(e.set, env)
    raise TypeError(f"not a boolean expression: {e!r}")


def eval_set(e, env) -> frozenset:
    if type(e) is SetLit:
        return frozenset(eval_int(x, env) for x in e.items)
    if type(e) is SetDiff:
        return eval_set(e.left, env) - eval_set(e.right, env)
    raise TypeError(f"not a set expression: {e!r}")


def free_vars(e) -> set:
    if isinstance(e, Var):
        return {e.name}
    out = set()
    for name in getattr(e, "__dataclass_fields__", ()):
        child = getattr(e, name)
        if isinstance(child, tuple):
            for c in child:
                out |= free_vars(c)
        elif hasattr(child, "__dataclass_fields__"):
            out |= free_vars(child)
    return out


# -- programs ----------------------------------------------------------------


@dataclass(frozen=True)
class Abort:
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Skip:
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Apply:
    var: str
    expr: object
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Seq:
    first: object
    second: object
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class DC:
    left: object
    right: object
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PC:
    """``left`` with probability ``prob``, otherwise ``right``."""
    left: object
    prob: object
    right: object
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SetDC:
    var: str
    set: object
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    guard: object
    then: object
    orelse: object
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class LoopAnnotation:
    invariant: object
    termination: str = "auto"  # or "assumed"

    def __post_init__(self):
        if self.termination not in ("auto", "assumed"):
            raise ValueError(f"termination must be 'auto' or 'assumed', not {self.termination!r}")


@dataclass(frozen=True)
class Loop:
    guard: object
    body: object
    annotation: Optional[LoopAnnotation] = None
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NondetRelation:
    """Successor states and a failure flag for every state, by rank.

    Result values of the monad are not stored: only the final states matter
    to the post-expectation.
    """
    space: object
    successors: tuple  # per rank: (frozenset of ranks, fail)

    @classmethod
    def from_function(cls, space, f) -> "NondetRelation":
        """Build from ``f(state) -> (iterable of (result, state), failed)``."""
        rows = []
        for s in space.states:
            pairs, failed = f(s)
            rows.append((frozenset(space.index(t) for _, t in pairs), bool(failed)))
        return cls(space, tuple(rows))

    @classmethod
    def from_states(cls, space, f) -> "NondetRelation":
        """Build from ``f(state) -> (iterable of states, failed)``."""
        return cls.from_function(space, lambda s: ((((None, t) for t in f(s)[0])), f(s)[1]))

    def successor_states(self, state) -> tuple:
        succ, failed = self.successors[self.space.index(state)]
        states = self.space.states
        return frozenset(states[j] for j in succ), failed


@dataclass(frozen=True)
class Exec:
    relation: NondetRelation
    name: str = "exec"
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Label:
    name: str
    body: object
    loc: Optional[tuple] = field(default=None, compare=False, repr=False)


PROGRAM_TYPES = (Abort, Skip, Apply, Seq, DC, PC, SetDC, If, Loop, Exec, Label)


def children(prog) -> tuple:
    t = type(prog)
    if t is Seq:
        return (prog.first, prog.second)
    if t in (DC, PC):
        return (prog.left, prog.right)
    if t is If:
        return (prog.then, prog.orelse)
    if t in (Loop, Label):
        return (prog.body,)
    return ()


def walk(prog):
    yield prog
    for c in children(prog):
        yield from walk(c)


def has_loops(prog) -> bool:
    return any(isinstance(p, Loop) for p in walk(prog))


def unlabel(prog):
    while isinstance(prog, Label):
        prog = prog.body
    return prog


def strip_labels(prog):
    """Copy of ``prog`` with every Label node removed."""
    t = type(prog)
    if t is Label:
        return strip_labels(prog.body)
    if t is Seq:
        return Seq(strip_labels(prog.first), strip_labels(prog.second))
    if t is DC:
        return DC(strip_labels(prog.left), strip_labels(prog.right))
    if t is PC:
        return PC(strip_labels(prog.left), prog.prob, strip_labels(prog.right))
    if t is If:
        return If(prog.guard, strip_labels(prog.then), strip_labels(prog.orelse))
    if t is Loop:
        return Loop(prog.guard, strip_labels(prog.body), prog.annotation)
    return prog


def labels(prog) -> dict:
    return {p.name: p for p in walk(prog) if isinstance(p, Label)}


# -- pretty printing ---------------------------------------------------------


def _fmt_num(v: Fraction) -> str:
    s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return f"({s})" if v < 0 else s


_NUM_PREC = {"+": 1, "-": 1, "*": 2}


def _num_prec(e) -> int:
    return _NUM_PREC[e.op] if type(e) is BinOp else 3


def pretty_expr(e) -> str:
    t = type(e)
    if t is Num:
        return _fmt_num(e.value)
    if t is Var:
        return e.name
    if t is Neg:
        return f"(-{_wrap_num(e.operand, 3)})"
    if t is Iverson:
        return f"[{pretty_expr(e.cond)}]"
    if t is BinOp:
        p = _NUM_PREC[e.op]
        left = _wrap_num(e.left, p)
        right = _wrap_num(e.right, p + 1)
        return f"{left} {e.op} {right}"
    if t is BoolConst:
        return "true" if e.value else "false"
    if t is Cmp:
        return f"{pretty_expr(e.left)} {e.op} {pretty_expr(e.right)}"
    if t is Not:
        if type(e.operand) is BoolConst:
            return f"!{pretty_expr(e.operand)}"
        return f"!({pretty_expr(e.operand)})"
    if t is BoolOp:
        p = 1 if e.op == "|" else 2
        return f"{_wrap_bool(e.left, p)} {e.op} {_wrap_bool(e.right, p + 1)}"
    if t is In:
        return f"{pretty_expr(e.elem)} in {pretty_expr(e.set)}"
    if t is SetLit:
        return "{" + ", ".join(pretty_expr(x) for x in e.items) + "}"
    if t is SetDiff:
        right = pretty_expr(e.right)
        if type(e.right) is SetDiff:
            right = f"({right})"
        return f"{pretty_expr(e.left)} \\ {right}"
    raise TypeError(f"cannot print {e!r}")


def _wrap_num(e, min_prec):
    s = pretty_expr(e)
    return f"({s})" if _num_prec(e) < min_prec else s


def _wrap_bool(e, min_prec):
    s = pretty_expr(e)
    prec = {"|": 1, "&": 2}[e.op] if type(e) is BoolOp else 3
    return f"({s})" if prec < min_prec else s


def _level(p) -> int:
    t = type(p)
    if t is Seq:
        return 1
    if t is DC:
        return 2
    if t is PC:
        return 3
    return 4


def _wrap(p, min_level) -> str:
    s = pretty(p)
    return f"({s})" if _level(p) < min_level else s


def pretty(prog) -> str:
    t = type(prog)
    if t is Skip:
        return "skip"
    if t is Abort:
        return "abort"
    if t is Apply:
        return f"{prog.var} := {pretty_expr(prog.expr)}"
    if t is SetDC:
        return f"{prog.var} :: {pretty_expr(prog.set)}"
    if t is Seq:
        return f"{_wrap(prog.first, 2)} ; {_wrap(prog.second, 1)}"
    if t is DC:
        return f"{_wrap(prog.left, 3)} [] {_wrap(prog.right, 2)}"
    if t is PC:
        return f"{_wrap(prog.left, 4)} [{pretty_expr(prog.prob)}] {_wrap(prog.right, 4)}"
    if t is If:
        return f"if {pretty_expr(prog.guard)} then {pretty(prog.then)} else {pretty(prog.orelse)} fi"
    if t is Loop:
        s = f"do {pretty_expr(prog.guard)} -> {pretty(prog.body)} od"
        ann = prog.annotation
        if ann is not None:
            s += f" @invariant {pretty_expr(ann.invariant)}"
            if ann.termination != "auto":
                s += f" @termination {ann.termination}"
        return s
    if t is Label:
        return f"label {prog.name}: {_wrap(prog.body, 4)}"
    if t is Exec:
        return f"<exec {prog.name}>"
    raise TypeError(f"cannot print {prog!r}")


def pretty_file(space, prog) -> str:
    return f"{space.render()}\n{pretty(prog)}\n"
