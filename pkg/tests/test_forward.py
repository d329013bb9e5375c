import random
from fractions import Fraction

import pytest

from pgcl import (
    DC, Expectation, FixpointConfig, SpaceMismatch, StateSpace, UnsupportedProgram, expectation_of,
    oracle_wp, oracle_wp_all, parse_expr, parse_program, refines_exact, refines_falsify, resolutions,
    transform,
)
from pgcl.forward import MAX_RESOLUTIONS, ResolutionLimit, SubDistribution, prune

from conftest import load
from randprog import programs

SP = StateSpace.of(x=[0, 1, 2])


def test_dirac_and_choice_resolutions():
    s = SP.state(x=0)
    r = resolutions(parse_program("x := 1 [] x := 2", SP), SP, s)
    assert r == {SubDistribution.dirac(SP, 1), SubDistribution.dirac(SP, 2)}
    pc = resolutions(parse_program("x := 1 [1/4] x := 2", SP), SP, s)
    (d,) = pc
    assert d.as_dict() == {(1,): Fraction(1, 4), (2,): Fraction(3, 4)}


def test_abort_is_empty_mass():
    (d,) = resolutions(parse_program("abort", SP), SP, (0,))
    assert d.total() == 0


def test_prune_drops_dominating_distributions():
    light = SubDistribution(SP, [(0, Fraction(1, 2))])
    heavy = SubDistribution(SP, [(0, Fraction(1, 2)), (1, Fraction(1, 2))])
    assert prune([heavy, light, light]) == [light]


def test_loops_are_unsupported():
    sp, loop = load("geometric.pgcl")
    with pytest.raises(UnsupportedProgram):
        resolutions(loop, sp, (0,))


def test_stuck_exec_is_unsupported():
    from pgcl import Exec, NondetRelation
    rel = NondetRelation(SP, tuple((frozenset(), False) for _ in SP.states))
    with pytest.raises(UnsupportedProgram):
        resolutions(Exec(rel), SP, (0,))


def test_resolution_limit():
    sp = StateSpace.of(x=[0, 1], y=[0, 1], z=[0, 1])
    # each independent demonic-then-probabilistic stage multiplies resolutions
    stage = "((x := 0 [] x := 1) [1/2] (y := 0 [] y := 1))"
    prog = parse_program(" ; ".join([stage] * 4), sp)
    with pytest.raises(ResolutionLimit):
        resolutions(prog, sp, (0, 0, 0), limit=8)
    assert MAX_RESOLUTIONS == 50_000


def test_oracle_agrees_on_monty():
    for name, value in (("monty_noswitch.pgcl", Fraction(1, 3)), ("monty_switch.pgcl", Fraction(2, 3))):
        sp, prog = load(name)
        post = expectation_of(parse_expr("[G = P]", sp), sp)
        assert oracle_wp(prog, post, sp.states[0]) == value
        assert oracle_wp_all(prog, post) == transform(prog, True, post)


def test_oracle_matches_engine_on_random_programs():
    for sp, prog in programs(40, seed=11, stuck=False):
        rng = random.Random(1)
        posts = [Expectation(sp, [rng.choice((0, Fraction(1, 2), 1, 2)) for _ in sp.states]) for _ in range(5)]
        for post in posts:
            assert oracle_wp_all(prog, post) == transform(prog, True, post)


def test_refinement_attack_suite():
    sp, attack = load("attack.pgcl")
    _, fixed = load("attack_fixed_secret.pgcl")
    _, leak = load("attack_leak.pgcl")
    assert refines_exact(attack, fixed, sp).holds
    verdict = refines_exact(attack, leak, sp)
    assert not verdict.holds
    cex = verdict.counterexample
    # replay: the separating post really separates
    assert transform(attack, True, cex.post)(cex.state) == cex.lhs
    assert transform(leak, True, cex.post)(cex.state) == cex.rhs
    assert cex.lhs > cex.rhs
    assert all(0 <= v <= 1 for v in cex.post.values)


def test_refinement_is_reflexive_and_choice_refines():
    a = parse_program("x := 1 [1/2] x := 2", SP)
    b = parse_program("x := 0", SP)
    assert refines_exact(a, a, SP).holds
    assert refines_exact(DC(a, b), a, SP).holds
    assert not refines_exact(a, DC(a, b), SP).holds


def test_refinement_needs_same_space():
    with pytest.raises(SpaceMismatch):
        refines_exact(parse_program("skip", SP), parse_program("skip", SP), SP, StateSpace.of(y=[0]))


def test_exact_refinement_rejects_loops():
    sp, loop = load("geometric.pgcl")
    with pytest.raises(UnsupportedProgram):
        refines_exact(loop, loop, sp)


def test_falsify_finds_leak_and_is_reproducible():
    sp, attack = load("attack.pgcl")
    _, leak = load("attack_leak.pgcl")
    a = refines_falsify(attack, leak, sp, samples=50, seed=3)
    b = refines_falsify(attack, leak, sp, samples=50, seed=3)
    assert not a.holds and a.counterexample == b.counterexample


def test_falsify_handles_loops():
    sp, loop = load("geometric.pgcl")
    assert refines_falsify(loop, loop, sp, samples=10).holds
    assert refines_falsify(loop, loop, sp, samples=10, cfg=FixpointConfig(exact=True)).holds


def test_hull_prune_preserves_minima():
    from pgcl.forward import hull_prune
    rng = random.Random(17)
    sp = StateSpace.of(x=[0, 1, 2], y=[0, 1])
    for _ in range(20):
        dists = []
        for _ in range(rng.randint(2, 40)):
            w = [rng.randint(0, 4) for _ in sp.states]
            tot = sum(w) or 1
            dists.append(SubDistribution(sp, [(t, Fraction(v, tot)) for t, v in enumerate(w)]))
        kept = hull_prune(prune(dists))
        assert set(kept) <= set(dists)
        for _ in range(10):
            q = [Fraction(rng.randint(0, 5)) for _ in sp.states]
            assert min(d.expect(q) for d in kept) == min(d.expect(q) for d in dists)
