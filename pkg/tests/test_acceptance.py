"""Acceptance criteria, one test each, all at exact rational equality.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary, or directly when this file is run as a script.
"""
from __future__ import annotations

import random
from fractions import Fraction

import pytest
from click.testing import CliRunner

from pgcl import (
    DC, Abort, Exec, Expectation, FixpointConfig, NondetRelation, StateSpace, bound_of,
    check_well_def, expectation_of, loop_fixpoint, oracle_wp_all, parse_expr, refines_exact,
    transform, wlp, wp,
)
from pgcl.cli import main as cli
from pgcl.forward import random_expectation
from pgcl.syntax import labels
from pgcl.vcg import SpecDB, Triple, load_specs, loop_rule, prove

from conftest import PROGRAMS, load
from randprog import depth, programs, random_program, random_space

RESULTS: dict = {}
N_RANDOM = 200
RANDOM_SEED = 2024
HEALTH_TRIALS = 20


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    assert ok, RESULTS[n]


def ex(text, sp):
    return expectation_of(parse_expr(text, sp), sp)


def const(values, c):
    return all(v == c for v in values)


def random_suite():
    suite = list(programs(N_RANDOM, seed=RANDOM_SEED, stuck=False))
    assert all(len(sp.names) <= 3 and max(map(len, sp.domains.values())) <= 3 and depth(p) <= 6
               for sp, p in suite)
    return suite


def test_criterion_1_monty_noswitch():
    sp, prog = load("monty_noswitch.pgcl")
    w = wp(prog, ex("[G = P]", sp))
    res = prove(Triple(ex("1/3", sp), prog, ex("[G = P]", sp)), SpecDB(sp))
    ok = sp.size == 27 and const(w.values, Fraction(1, 3)) and res.verified and res.rules[0][0] == "exact"
    record(1, ok, f"wp = 1/3 at all {sp.size} states by exact unfolding")


def test_criterion_2_monty_switch():
    sp, prog = load("monty_switch.pgcl")
    w = wp(prog, ex("[G = P]", sp))
    path = str(PROGRAMS / "monty_switch.pgcl")
    runner = CliRunner()
    ok_code = runner.invoke(cli, ["check", path, "--pre", "2/3", "--post", "[G=P]"]).exit_code
    bad_code = runner.invoke(cli, ["check", path, "--pre", "2/3 + 1/1000", "--post", "[G=P]"]).exit_code
    ok = const(w.values, Fraction(2, 3)) and ok_code == 0 and bad_code == 1
    record(2, ok, f"wp = 2/3 at all 27 states; check exits {ok_code} (pre 2/3) and {bad_code} (pre 2/3+1/1000)")


def test_criterion_3_vcg_monty_switch():
    sp, prog = load("monty_switch.pgcl")
    parts = labels(prog)
    # derive component specs backwards through the composition
    post = ex("[G = P]", sp)
    derived = {}
    for name in ("switch", "reveal", "guess"):
        pre = wp(parts[name].body, post)
        derived[name] = (pre, post)
        post = pre
    db = SpecDB(sp)
    db.add_wp("wp_hide", Expectation.one(sp), parts["hide"].body, ex("[P in {1, 2, 3}]", sp))
    for name, (pre, post) in derived.items():
        db.add_wp(f"wp_{name}", pre, parts[name].body, post)
    # the shipped spec file states the same pairs
    shipped = load_specs((PROGRAMS / "monty_switch.spec").read_text(), sp, prog)
    by_name = {s.name: s.triple for s in shipped.specs if s.kind == "wp-rule"}
    same = len(by_name) == 4 and all(
        by_name[d.name].pre == d.triple.pre and by_name[d.name].post == d.triple.post for d in db.specs)
    res = prove(Triple(ex("2/3", sp), prog, ex("[G = P]", sp)), db)
    scaled = ("wp_scale", ("wp_hide", Fraction(2, 3))) in res.rules
    ok = res.verified and res.assumptions == 0 and scaled and same
    record(3, ok, f"{len(res.obligations)} obligations discharged; hide spec scaled by 2/3")


def test_criterion_4_guessing_attack():
    sp, spec = load("secret_spec.pgcl")
    a = wp(spec, ex("[l != h]", sp))
    asp, attack = load("attack.pgcl")
    _, fixed = load("attack_fixed_secret.pgcl")
    _, leak = load("attack_leak.pgcl")
    holds = refines_exact(attack, fixed, asp)
    fails = refines_exact(attack, leak, asp)
    cex = fails.counterexample
    replay = (cex is not None
              and transform(attack, True, cex.post)(cex.state) == cex.lhs
              and transform(leak, True, cex.post)(cex.state) == cex.rhs
              and cex.lhs > cex.rhs)
    ok = const(a.values, 0) and holds.holds and not fails.holds and replay
    detail = "(a) wp = 0 everywhere; (b) refinement holds; (c) refinement fails"
    if cex is not None:
        detail += f" at {asp.format_state(cex.state)} with {cex.lhs} > {cex.rhs}, replayed"
    record(4, ok, detail)


def test_criterion_5_oracle_equivalence():
    mismatches, checked = 0, 0
    for i, (sp, prog) in enumerate(random_suite()):
        rng = random.Random(i)
        posts = [Expectation.indicator(sp, s) for s in sp.states]
        posts += [random_expectation(sp, rng) for _ in range(20)]
        for post in posts:
            checked += 1
            if oracle_wp_all(prog, post) != transform(prog, True, post):
                mismatches += 1
    record(5, mismatches == 0, f"{N_RANDOM} programs, {checked} posts, {mismatches} mismatches")


def test_criterion_6_healthiness_suite():
    subjects = [(sp, p, f"random #{i}") for i, (sp, p) in enumerate(random_suite())]
    for name in ("monty_noswitch.pgcl", "monty_switch.pgcl", "geometric.pgcl"):
        sp, p = load(name)
        subjects.append((sp, p, name))
    failures = []
    for sp, p, name in subjects:
        rep = check_well_def(p, sp, trials=HEALTH_TRIALS, seed=0)
        failures += [f"{name}: {c.describe()}" for c in rep.checks() if not c.passed]
    record(6, not failures, f"{len(subjects)} programs, {len(failures)} counterexamples"
           + (f" (first: {failures[0]})" if failures else ""))


def test_criterion_7_geometric_loop():
    sp, loop = load("geometric.pgcl")
    one = Expectation.one(sp)
    c0 = sp.state(c=0)
    closed = all(
        loop_fixpoint(loop.guard, loop.body, True, one, FixpointConfig(tolerance=0, max_iter=k)).value(c0)
        == 1 - Fraction(1, 2**k)
        for k in range(1, 21))
    cfg = FixpointConfig(exact=True)
    exact = wp(loop, one, cfg)
    rule = loop_rule(loop, sp, cfg)
    res = prove(Triple(one, loop, ex("[c = 1]", sp)), SpecDB(sp, cfg), cfg)
    zero_slack = all(o.slack == 0 for o in res.obligations)
    ok = closed and const(exact.values, 1) and rule.conclusion.pre == one and res.verified and zero_slack
    record(7, ok, "iterates 1 - 2^-k for k = 1..20; exact value 1; loop rule discharged with zero slack")


def test_criterion_8_abort_and_exec_duals():
    rng = random.Random(8)
    sp = StateSpace.of(x=[0, 1, 2], y=[0, 1])
    fail = Exec(NondetRelation(sp, tuple((frozenset(), True) for _ in sp.states)), "fail")
    stuck = Exec(NondetRelation(sp, tuple((frozenset(), False) for _ in sp.states)), "stuck")
    ok = True
    for _ in range(10):
        p = Expectation(sp, [rng.choice((0, Fraction(1, 3), 1, Fraction(5, 2), 4)) for _ in sp.states])
        b = bound_of(p)
        ok &= const(wp(Abort(), p).values, 0) and const(wlp(Abort(), p).values, b)
        ok &= wp(fail, p) == wp(Abort(), p) and wlp(fail, p) == wlp(Abort(), p)
        ok &= const(wp(stuck, p).values, b) and const(wlp(stuck, p).values, b)
    record(8, ok, "10 posts: Abort gives 0 / bound_of; failing Exec = Abort; stuck Exec = bound_of")


def test_criterion_9_choice_refines_component():
    rng = random.Random(9)
    held = 0
    for _ in range(50):
        sp = random_space(rng)
        a = random_program(sp, rng, 6, stuck=False)
        b = random_program(sp, rng, 6, stuck=False)
        held += refines_exact(DC(a, b), a, sp).holds
    record(9, held == 50, f"{held}/50 random pairs: a [] b refined by a")


if __name__ == "__main__":  # pragma: no cover
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
