import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pgcl import ParseError, parse, parse_bexpr, parse_expr, parse_program
from pgcl.model import StateSpace
from pgcl.syntax import (
    DC, PC, Apply, BinOp, Cmp, In, Iverson, Loop, Neg, Num, Seq, SetDC, SetDiff, Skip, Var,
    eval_num, labels, pretty, pretty_expr, pretty_file, strip_labels,
)

from conftest import PROGRAMS
from randprog import random_program, random_space

SP = StateSpace.of(x=[0, 1, 2], y=[0, 1])


def test_seq_and_choice_associate_right():
    p = parse_program("x := 0 ; x := 1 ; x := 2", SP)
    assert isinstance(p.second, Seq) and p.first == Apply("x", Num(0))
    d = parse_program("x := 0 [] x := 1 [] x := 2", SP)
    assert isinstance(d, DC) and isinstance(d.right, DC)


def test_precedence_seq_below_choice():
    p = parse_program("x := 0 [] x := 1 ; skip", SP)
    assert isinstance(p, Seq) and isinstance(p.first, DC)


def test_probabilistic_choice():
    p = parse_program("x := 1 [1/3] skip", SP)
    assert p == PC(Apply("x", Num(1)), Num(Fraction(1, 3)), Skip())


def test_pc_is_not_associative():
    with pytest.raises(ParseError):
        parse_program("skip [1/2] skip [1/2] skip", SP)


def test_state_dependent_probability():
    p = parse_program("skip [1/2 * [x = 0]] x := 0", SP)
    assert eval_num(p.prob, {"x": 0, "y": 0}) == Fraction(1, 2)
    assert eval_num(p.prob, {"x": 1, "y": 0}) == 0


def test_set_choice_and_difference():
    p = parse_program("x :: {0, 1, 2} \\ {y}", SP)
    assert isinstance(p, SetDC) and isinstance(p.set, SetDiff)
    assert parse_program("x :∈ {0}", SP) == SetDC("x", p.set.left.__class__((Num(0),)))


def test_loop_annotation():
    p = parse_program("do x = 0 -> x := 1 od @invariant [y = 0] @termination assumed", SP)
    assert isinstance(p, Loop)
    assert p.annotation.termination == "assumed"
    assert p.annotation.invariant == Iverson(Cmp("=", Var("y"), Num(0)))


def test_labels():
    p = parse_program("label a: x := 0 ; label b: (skip [] x := 1)", SP)
    found = labels(p)
    assert set(found) == {"a", "b"}
    assert strip_labels(p) == parse_program("x := 0 ; (skip [] x := 1)", SP)


def test_negative_literal_folds():
    assert parse_expr("-3") == Num(-3)
    assert parse_expr("-x") == Neg(Var("x"))
    assert pretty_expr(Num(-3)) == "(-3)"


def test_membership_in_guards():
    e = parse_bexpr("x in {0, y}", SP)
    assert isinstance(e, In)


def test_iverson_and_comparison_group():
    e = parse_bexpr("(x + 1) = 2 & (y = 0 | !(x < 1))", SP)
    assert pretty_expr(e) == pretty_expr(parse_bexpr(pretty_expr(e), SP))


def test_comments_and_trailing_semicolon():
    sp, p = parse("# header\nvar x : {0..2}; -- range\nx := 1;\n")
    assert sp.domains["x"] == (0, 1, 2)
    assert p == Apply("x", Num(1))


@pytest.mark.parametrize("src, where", [
    ("var x : {0};\ny := 1", (2, 1)),
    ("var x : {0};\nx := ", (2, 6)),
    ("var x : {0}; var x : {1};\nskip", (1, 18)),
    ("var x : {2..1};\nskip", (1, 9)),
])
def test_errors_have_positions(src, where):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert (info.value.line, info.value.col) == where


def test_shipped_programs_parse():
    for path in PROGRAMS.glob("*.pgcl"):
        sp, p = parse(path.read_text())
        assert parse(pretty_file(sp, p)) == (sp, p)


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_pretty_parse_round_trip(seed):
    rng = random.Random(seed)
    space = random_space(rng)
    prog = random_program(space, rng, depth=6, exec_rate=0.0)
    text = pretty(prog)
    assert parse_program(text, space) == prog
    assert pretty(parse_program(text, space)) == text


@settings(max_examples=150, deadline=None)
@given(st.recursive(
    st.one_of(st.integers(-5, 5).map(lambda n: Num(n)),
              st.fractions(min_value=0, max_value=3, max_denominator=7).map(Num),
              st.sampled_from([Var("x"), Var("y")])),
    lambda kids: st.one_of(
        st.tuples(st.sampled_from("+-*"), kids, kids).map(lambda t: BinOp(*t)),
        kids.filter(lambda k: not isinstance(k, Num)).map(Neg)),
    max_leaves=8))
def test_expression_round_trip(e):
    assert parse_expr(pretty_expr(e), SP) == e
