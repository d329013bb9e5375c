from fractions import Fraction

import pytest

from pgcl.model import (
    Expectation, Predicate, StateSpace, bound_of, embed, entails, enumerate_states, first_violation,
    pconj, scale,
)


def test_states_are_lexicographic():
    sp = StateSpace.of(a=[1, 0], b=[0, 1])
    assert sp.states == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert enumerate_states(sp) == sp.states
    assert sp.size == 4
    assert sp.index((1, 0)) == 2
    assert sp.update((0, 1), "a", 1) == (1, 1)


def test_monty_space_has_27_states():
    assert StateSpace.of(P=[1, 2, 3], G=[1, 2, 3], C=[1, 2, 3]).size == 27


def test_duplicate_names_rejected():
    with pytest.raises(ValueError):
        StateSpace((("x", (0, 1)), ("x", (0,))))


def test_negative_expectation_rejected():
    sp = StateSpace.of(x=[0, 1])
    with pytest.raises(ValueError):
        Expectation(sp, [1, -1])


def test_embed_is_zero_one():
    sp = StateSpace.of(x=[0, 1, 2])
    p = Predicate.from_function(sp, lambda e: e["x"] > 0)
    assert embed(p).values == (0, 1, 1)
    assert embed(p).is_standard()


def test_entailment_and_violation():
    sp = StateSpace.of(x=[0, 1])
    lo = Expectation(sp, [Fraction(1, 3), 0])
    hi = Expectation(sp, [Fraction(1, 2), 0])
    assert entails(lo, hi)
    assert not entails(hi, lo)
    assert first_violation(hi, lo) == ((0,), Fraction(1, 2), Fraction(1, 3))
    assert first_violation(lo, hi) is None


def test_zero_entails_everything():
    sp = StateSpace.of(x=[0, 1])
    assert entails(Expectation.zero(sp), Expectation(sp, [3, 0]))


def test_bound_pconj_scale():
    sp = StateSpace.of(x=[0, 1, 2])
    p = Expectation(sp, [Fraction(1, 2), 1, Fraction(3, 4)])
    q = Expectation(sp, [Fraction(1, 4), 1, Fraction(1, 2)])
    assert bound_of(p) == 1
    assert pconj(p, q).values == (0, 1, Fraction(1, 4))
    assert scale(2, p).values == (1, 2, Fraction(3, 2))
    with pytest.raises(ValueError):
        scale(0, p)


def test_mismatched_spaces():
    a = Expectation.one(StateSpace.of(x=[0, 1]))
    b = Expectation.one(StateSpace.of(y=[0, 1]))
    with pytest.raises(ValueError):
        entails(a, b)
