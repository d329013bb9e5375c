"""Finite state spaces and exact-rational expectations over them.

A state is a tuple of ints aligned with the declaration order of the
space's variables.  Expectations and predicates are dense vectors indexed
by a state's rank in :meth:`StateSpace.states`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

from .errors import SpaceMismatch

State = tuple


@dataclass(frozen=True)
class StateSpace:
    vars: tuple  # ((name, (v0, v1, ...)), ...)

    def __post_init__(self):
        names = [n for n, _ in self.vars]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        norm = []
        for name, dom in self.vars:
            dom = tuple(sorted(set(int(v) for v in dom)))
            if not dom:
                raise ValueError(f"variable {name!r} has an empty domain")
            norm.append((name, dom))
        object.__setattr__(self, "vars", tuple(norm))

    @classmethod
    def of(cls, **domains: Iterable[int]) -> "StateSpace":
        return cls(tuple((k, tuple(v)) for k, v in domains.items()))

    @cached_property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.vars)

    @cached_property
    def domains(self) -> dict:
        return dict(self.vars)

    @cached_property
    def size(self) -> int:
        n = 1
        for _, dom in self.vars:
            n *= len(dom)
        return n

    @cached_property
    def states(self) -> list:
        return list(itertools.product(*(dom for _, dom in self.vars)))

    @cached_property
    def bindings(self) -> list:
        names = self.names
        return [dict(zip(names, s)) for s in self.states]

    @cached_property
    def _rank(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def _position(self) -> dict:
        return {n: i for i, n in enumerate(self.names)}

    def index(self, state: State) -> int:
        try:
            return self._rank[tuple(state)]
        except KeyError:
            raise ValueError(f"{state!r} is not a state of this space") from None

    def state(self, **values: int) -> State:
        if set(values) != set(self.names):
            raise ValueError(f"a state binds exactly {self.names}, got {sorted(values)}")
        s = tuple(values[n] for n in self.names)
        self.index(s)
        return s

    def get(self, state: State, name: str) -> int:
        return state[self._position[name]]

    def update(self, state: State, name: str, value: int) -> State:
        """Rebind one variable; the result must stay inside the space."""
        pos = self._position[name]
        s = state[:pos] + (value,) + state[pos + 1:]
        self.index(s)
        return s

    def format_state(self, state: State) -> str:
        return " ".join(f"{n}={v}" for n, v in zip(self.names, state))

    def render(self) -> str:
        return "\n".join(
            f"var {n} : {{{', '.join(map(str, dom))}}};" for n, dom in self.vars
        )


def enumerate_states(space: StateSpace) -> list:
    return list(space.states)


def _check_same(a, b):
    if a.space != b.space:
        raise SpaceMismatch("operands live on different state spaces")


class Predicate:
    __slots__ = ("space", "values")

    def __init__(self, space: StateSpace, values: Sequence[bool]):
        if len(values) != space.size:
            raise ValueError(f"predicate needs {space.size} values, got {len(values)}")
        self.space = space
        self.values = tuple(bool(v) for v in values)

    @classmethod
    def from_function(cls, space: StateSpace, f: Callable[[Mapping[str, int]], bool]):
        return cls(space, [f(b) for b in space.bindings])

    def __call__(self, state: State) -> bool:
        return self.values[self.space.index(state)]

    def __eq__(self, other):
        return isinstance(other, Predicate) and self.space == other.space and self.values == other.values

    def __hash__(self):
        return hash((self.space, self.values))

    def implies(self, other: "Predicate") -> bool:
        _check_same(self, other)
        return all(b or not a for a, b in zip(self.values, other.values))


class Expectation:
    """A total, nonnegative map from states to exact rationals."""

    __slots__ = ("space", "values")

    def __init__(self, space: StateSpace, values: Sequence):
        if len(values) != space.size:
            raise ValueError(f"expectation needs {space.size} values, got {len(values)}")
        vals = tuple(Fraction(v) for v in values)
        for v in vals:
            if v < 0:
                raise ValueError(f"expectation value {v} is negative")
        self.space = space
        self.values = vals

    @classmethod
    def const(cls, space: StateSpace, c) -> "Expectation":
        return cls(space, [Fraction(c)] * space.size)

    @classmethod
    def zero(cls, space: StateSpace) -> "Expectation":
        return cls.const(space, 0)

    @classmethod
    def one(cls, space: StateSpace) -> "Expectation":
        return cls.const(space, 1)

    @classmethod
    def from_function(cls, space: StateSpace, f: Callable[[Mapping[str, int]], object]):
        return cls(space, [f(b) for b in space.bindings])

    @classmethod
    def indicator(cls, space: StateSpace, state: State) -> "Expectation":
        i = space.index(state)
        return cls(space, [1 if j == i else 0 for j in range(space.size)])

    def __call__(self, state: State) -> Fraction:
        return self.values[self.space.index(state)]

    def __getitem__(self, rank: int) -> Fraction:
        return self.values[rank]

    def __eq__(self, other):
        return isinstance(other, Expectation) and self.space == other.space and self.values == other.values

    def __hash__(self):
        return hash((self.space, self.values))

    def __repr__(self):
        distinct = set(self.values)
        if len(distinct) == 1:
            return f"Expectation(λs.{self.values[0]})"
        return f"Expectation({[str(v) for v in self.values]})"

    def __add__(self, other: "Expectation") -> "Expectation":
        _check_same(self, other)
        return Expectation(self.space, [a + b for a, b in zip(self.values, other.values)])

    def __mul__(self, other: "Expectation") -> "Expectation":
        _check_same(self, other)
        return Expectation(self.space, [a * b for a, b in zip(self.values, other.values)])

    def entails(self, other: "Expectation") -> bool:
        return entails(self, other)

    def bound(self) -> Fraction:
        return bound_of(self)

    def is_standard(self) -> bool:
        return all(v in (0, 1) for v in self.values)


def embed(p: Predicate) -> Expectation:
    return Expectation(p.space, [1 if v else 0 for v in p.values])


def entails(p: Expectation, q: Expectation) -> bool:
    """Pointwise ``p <= q``."""
    _check_same(p, q)
    return all(a <= b for a, b in zip(p.values, q.values))


def first_violation(p: Expectation, q: Expectation):
    """The first state where ``p > q``, with both values, or ``None``."""
    _check_same(p, q)
    for s, a, b in zip(p.space.states, p.values, q.values):
        if a > b:
            return s, a, b
    return None


def bound_of(p: Expectation) -> Fraction:
    return max(p.values)


def pconj(p: Expectation, q: Expectation) -> Expectation:
    """Probabilistic conjunction ``max(p + q - 1, 0)``."""
    _check_same(p, q)
    return Expectation(p.space, [max(a + b - 1, 0) for a, b in zip(p.values, q.values)])


def scale(c, p: Expectation) -> Expectation:
    c = Fraction(c)
    if c <= 0:
        raise ValueError(f"scale factor must be positive, got {c}")
    return Expectation(p.space, [c * v for v in p.values])
