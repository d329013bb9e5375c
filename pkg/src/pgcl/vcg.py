"""Probabilistic Hoare triples and a verification-condition generator.

``prove_triple`` walks the program backwards from the goal's post,
choosing for each subtree, in order:

1. a stored specification whose post matches as written;
2. a stored specification whose post entails the required one
   (post-strengthening, leaving that entailment as a side obligation);
3. internal rules: a stored specification rescaled by a positive factor,
   sequential decomposition through a midpoint, the loop rule, structural
   rules for choices and conditionals, and exact evaluation of subtrees
   that no specification mentions.

Obligations are discharged by exact evaluation rather than proof.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .engine import (
    DEFAULT_CONFIG, FixpointConfig, expectation_of, predicate_of, transform,
)
from .errors import ParseError, SpecRejected, VCGError
from .health import check_well_def
from .model import Expectation, embed, entails, first_violation, pconj, scale
from .parser import Parser
from .syntax import (
    DC, PC, If, Loop, Seq, eval_num, has_loops, labels, pretty, unlabel, walk,
)

log = logging.getLogger(__name__)

DISCHARGED = "discharged"
OPEN = "open"
FAILED = "failed"
ASSUMED = "assumed"

HEALTH_TRIALS = 20


@dataclass
class Triple:
    pre: Expectation
    prog: object
    post: Expectation

    def holds(self, cfg: FixpointConfig = DEFAULT_CONFIG) -> bool:
        return entails(self.pre, transform(self.prog, True, self.post, cfg))


@dataclass
class Spec:
    name: str
    triple: Optional[Triple]
    kind: str = "wp-rule"  # or "health-rule"
    assumed: bool = False
    prog: object = None
    origin: str = "user"

    def __post_init__(self):
        if self.prog is None and self.triple is not None:
            self.prog = self.triple.prog
        self.prog = unlabel(self.prog)


@dataclass
class Obligation:
    kind: str  # entailment | invariant-preservation | termination | soundness
    lhs: Optional[Expectation]
    rhs: Optional[Expectation]
    origin: str
    status: str = OPEN
    counterexample: Optional[tuple] = None  # (state, lhs value, rhs value)
    slack: Fraction = Fraction(0)
    loc: Optional[tuple] = None

    def discharge(self) -> "Obligation":
        if self.status == ASSUMED:
            return self
        lhs = self.lhs
        if self.slack:
            lhs = Expectation(lhs.space, [max(v - self.slack, 0) for v in lhs.values])
        bad = first_violation(lhs, self.rhs)
        if bad is None:
            self.status = DISCHARGED
        else:
            s, _, b = bad
            self.status = FAILED
            self.counterexample = (s, self.lhs(s), b)
        return self


class SpecDB:
    """User specifications, looked up by (label-stripped) program subtree."""

    def __init__(self, space, cfg: FixpointConfig = DEFAULT_CONFIG):
        self.space = space
        self.cfg = cfg
        self.specs: list = []

    def add(self, spec: Spec) -> Spec:
        if spec.kind == "wp-rule" and not spec.assumed and spec.origin == "user":
            if not spec.triple.holds(self.cfg):
                raise SpecRejected(f"specification {spec.name} does not hold")
        if spec.kind == "health-rule" and not spec.assumed:
            report = check_well_def(spec.prog, self.space, trials=HEALTH_TRIALS, cfg=self.cfg)
            if not report.passed:
                raise SpecRejected(f"healthiness of {spec.name} fails")
        self.specs.append(spec)
        return spec

    def add_wp(self, name, pre, prog, post, assumed=False) -> Spec:
        return self.add(Spec(name, Triple(pre, prog, post), assumed=assumed))

    def add_health(self, name, prog, assumed=False) -> Spec:
        return self.add(Spec(name, None, kind="health-rule", prog=prog, assumed=assumed))

    def wp_specs(self, prog) -> list:
        p = unlabel(prog)
        return [s for s in self.specs if s.kind == "wp-rule" and s.prog == p]

    def health_spec(self, prog):
        p = unlabel(prog)
        return next((s for s in self.specs if s.kind == "health-rule" and s.prog == p), None)

    def mentions(self, prog) -> bool:
        return any(self.wp_specs(p) for p in walk(prog))


def apply_scale(spec: Triple, c) -> Triple:
    """Scale both expectations of a specification by ``c > 0``."""
    c = Fraction(c)
    if c <= 0:
        raise ValueError(f"scale factor must be positive, got {c}")
    return Triple(scale(c, spec.pre), spec.prog, scale(c, spec.post))


def _best_factor(spec_post: Expectation, post: Expectation) -> Fraction:
    """Largest ``c`` with ``c * spec_post <= post`` (0 if none is positive)."""
    ratios = [q / p for p, q in zip(spec_post.values, post.values) if p > 0]
    return min(ratios) if ratios else Fraction(0)


@dataclass
class LoopRuleResult:
    obligations: list
    conclusion: Triple


class _Generator:
    def __init__(self, db: SpecDB, cfg: FixpointConfig):
        self.db = db
        self.cfg = cfg
        self.space = db.space
        self.obligations: list = []
        self.rules: list = []  # (rule, detail) in application order
        self._health_seen: set = set()
        self.slack = Fraction(0)  # accumulated from loops terminated only to tolerance

    def emit(self, ob: Obligation) -> Obligation:
        self.obligations.append(ob.discharge())
        return ob

    def require_healthy(self, prog, name):
        p = unlabel(prog)
        if p in self._health_seen:
            return
        self._health_seen.add(p)
        spec = self.db.health_spec(p)
        if spec is not None:
            status = ASSUMED if spec.assumed else DISCHARGED
            self.obligations.append(Obligation("soundness", None, None, f"healthy(wp {name}) by {spec.name}", status))
            return
        report = check_well_def(p, self.space, trials=HEALTH_TRIALS, cfg=self.cfg)
        ob = Obligation("soundness", None, None, f"healthy(wp {name}) by sampling",
                        DISCHARGED if report.passed else FAILED)
        if not report.passed:
            cex = next(c for c in report.checks() if not c.passed).counterexample
            ob.counterexample = (cex.get("state"), None, None)
        self.obligations.append(ob)

    # -- rules ---------------------------------------------------------------

    def pre(self, prog, post: Expectation) -> Expectation:
        p = unlabel(prog)
        loc = getattr(prog, "loc", None)
        specs = self.db.wp_specs(p)
        for spec in specs:
            if spec.triple.post == post:
                self.rules.append(("spec", spec.name))
                self.require_healthy(p, spec.name)
                return spec.triple.pre
        for spec in specs:
            if entails(spec.triple.post, post):
                self.rules.append(("wp_strengthen_post", spec.name))
                self.require_healthy(p, spec.name)
                self.emit(Obligation("entailment", spec.triple.post, post,
                                     f"wp_strengthen_post[{spec.name}]", loc=loc))
                return spec.triple.pre
        for spec in specs:
            c = _best_factor(spec.triple.post, post)
            if c > 0:
                scaled = apply_scale(spec.triple, c)
                self.rules.append(("wp_scale", (spec.name, c)))
                self.require_healthy(p, spec.name)
                if scaled.post != post:
                    self.emit(Obligation("entailment", scaled.post, post,
                                         f"wp_strengthen_post[wp_scale[{spec.name}, {c}]]", loc=loc))
                return scaled.pre
        if specs:
            log.info("no stored specification of %s fits the required post", pretty(p))
        return self.internal(p, post, loc)

    def internal(self, p, post, loc):
        structural = self.db.mentions(p) or has_loops(p)
        t = type(p)
        if structural and t is Seq:
            self.rules.append(("valid_Seq", pretty(p.second)))
            mid = self.pre(p.second, post)
            return self.pre(p.first, mid)
        if structural and t is DC:
            a, b = self.pre(p.left, post), self.pre(p.right, post)
            self.rules.append(("wp_DC", None))
            return Expectation(self.space, [min(x, y) for x, y in zip(a.values, b.values)])
        if structural and t is PC:
            a, b = self.pre(p.left, post), self.pre(p.right, post)
            self.rules.append(("wp_PC", None))
            probs = [eval_num(p.prob, env) for env in self.space.bindings]
            return Expectation(self.space, [q * x + (1 - q) * y for q, x, y in zip(probs, a.values, b.values)])
        if structural and t is If:
            a, b = self.pre(p.then, post), self.pre(p.orelse, post)
            self.rules.append(("wp_If", None))
            g = predicate_of(p.guard, self.space).values
            return Expectation(self.space, [x if gi else y for gi, x, y in zip(g, a.values, b.values)])
        if t is Loop:
            if p.annotation is not None:
                return self.loop(p, post, loc)
            if not self.cfg.exact:
                raise VCGError(f"loop without @invariant and no specification: {pretty(p)}")
        self.rules.append(("exact", pretty(p)))
        return transform(p, True, post, self.cfg)

    def loop(self, p: Loop, post: Expectation, loc) -> Expectation:
        res = loop_rule(p, self.space, self.cfg, self)
        self.rules.append(("wp_Loop", pretty(p)))
        for ob in res.obligations:
            ob.loc = ob.loc or loc
        self.obligations.extend(res.obligations)
        concl = res.conclusion
        if all(o.status in (DISCHARGED, ASSUMED) for o in res.obligations):
            self.db.specs.append(Spec(f"wp_Loop@{loc}", concl, origin="wp_Loop"))
        if concl.post != post:
            self.emit(Obligation("entailment", concl.post, post, "wp_strengthen_post[wp_Loop]", loc=loc))
        return concl.pre


def loop_rule(loop: Loop, space, cfg: FixpointConfig = DEFAULT_CONFIG, gen: Optional[_Generator] = None) -> LoopRuleResult:
    """Obligations and conclusion of the loop rule for an annotated loop.

    Conclusion: ``pconj(I, wp loop 1) |= wp loop ([!G] * I)``.
    """
    ann = loop.annotation
    if ann is None:
        raise VCGError("loop rule needs an @invariant annotation")
    if gen is None:
        gen = _Generator(SpecDB(space, cfg), cfg)
    outer = gen.obligations
    gen.obligations = []
    inv = expectation_of(ann.invariant, space)
    one = Expectation.one(space)
    guard = embed(predicate_of(loop.guard, space))
    not_guard = Expectation(space, [1 - v for v in guard.values])
    gen.emit(Obligation("soundness", inv, one, "invariant bounded by 1"))
    body_pre = gen.pre(loop.body, inv)
    gen.emit(Obligation("invariant-preservation", guard * inv, body_pre, "wp_Loop preservation"))
    gen.require_healthy(loop.body, "loop body")
    if ann.termination == "assumed":
        term = one
        gen.obligations.append(Obligation("termination", one, one, "wp_Loop termination", ASSUMED))
    else:
        trace: list = []
        term = transform(loop, True, one, cfg, trace)
        # an iterate with residual 0 is a fixed point reached from below: the lfp itself
        _, _, converged, residual, _, method = trace[-1]
        exact = method == "policy-iteration" or (converged and residual == 0)
        slack = Fraction(0) if exact else cfg.tolerance
        gen.emit(Obligation("termination", one, term, "wp_Loop termination", slack=slack))
        gen.slack += slack
    gen.obligations.append(Obligation("soundness", None, None, "sub_distrib(loop)", ASSUMED))
    obligations = gen.obligations
    gen.obligations = outer
    conclusion = Triple(pconj(inv, term), loop, not_guard * inv)
    return LoopRuleResult(obligations, conclusion)


@dataclass
class ProofResult:
    obligations: list
    rules: list
    pre: Expectation

    @property
    def verified(self) -> bool:
        return all(o.status in (DISCHARGED, ASSUMED) for o in self.obligations)

    @property
    def assumptions(self) -> int:
        return sum(o.status == ASSUMED for o in self.obligations)


def prove(goal: Triple, db: SpecDB, cfg: FixpointConfig = DEFAULT_CONFIG) -> ProofResult:
    gen = _Generator(db, cfg)
    pre = gen.pre(goal.prog, goal.post)
    gen.emit(Obligation("entailment", goal.pre, pre, "goal", slack=gen.slack,
                        loc=getattr(goal.prog, "loc", None)))
    return ProofResult(gen.obligations, gen.rules, pre)


def prove_triple(goal: Triple, db: SpecDB, cfg: FixpointConfig = DEFAULT_CONFIG) -> list:
    return prove(goal, db, cfg).obligations


def verdict(obligations) -> str:
    failed = sum(o.status == FAILED for o in obligations)
    opened = sum(o.status == OPEN for o in obligations)
    assumed = sum(o.status == ASSUMED for o in obligations)
    if failed or opened:
        return f"FAILED ({failed + opened} of {len(obligations)} obligations)"
    if assumed:
        return f"VERIFIED ({assumed} assumption{'s' if assumed != 1 else ''})"
    return "VERIFIED"


def report(obligations, space=None) -> str:
    lines = [verdict(obligations), ""]
    width = max([len(o.kind) for o in obligations] + [4])
    lines.append(f"{'#':>3}  {'kind':<{width}}  {'status':<10}  origin")
    for i, o in enumerate(obligations, 1):
        where = f" @{o.loc[0]}:{o.loc[1]}" if o.loc else ""
        if o.slack:
            where += f" (slack {o.slack})"
        lines.append(f"{i:>3}  {o.kind:<{width}}  {o.status:<10}  {o.origin}{where}")
        if o.status == FAILED and o.counterexample is not None:
            s, a, b = o.counterexample
            shown = space.format_state(s) if space is not None and s is not None else s
            lines.append(f"       counterexample: {shown}  lhs = {a}  rhs = {b}")
    return "\n".join(lines)


# -- spec files --------------------------------------------------------------


class SpecFileError(ParseError):
    pass


def load_specs(text: str, space, prog, cfg: FixpointConfig = DEFAULT_CONFIG) -> SpecDB:
    """Parse lines ``[assume] spec NAME : PRE |- LABEL : POST`` and
    ``[assume] health LABEL``; LABEL names a ``label NAME:`` subtree."""
    db = SpecDB(space, cfg)
    subtrees = labels(prog)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        p = Parser(line, space)
        for t in p.tokens:
            t.line = lineno
        assumed = False
        if p.tok.kind == "ident" and p.tok.text == "assume":
            p.i += 1
            assumed = True
        head = p.ident()
        if head.text == "spec":
            name = p.ident().text
            p.expect(":")
            pre = p.expr()
            p.expect("|-")
            ref = p.ident()
            p.expect(":")
            post = p.expr()
            p.finish()
            if ref.text not in subtrees:
                raise SpecFileError(f"no subtree labelled {ref.text!r}", lineno, ref.col)
            db.add_wp(name, expectation_of(pre, space), subtrees[ref.text].body,
                      expectation_of(post, space), assumed=assumed)
        elif head.text == "health":
            ref = p.ident()
            p.finish()
            if ref.text not in subtrees:
                raise SpecFileError(f"no subtree labelled {ref.text!r}", lineno, ref.col)
            db.add_health(f"healthy_{ref.text}", subtrees[ref.text].body, assumed=assumed)
        else:
            raise SpecFileError(f"expected 'spec' or 'health', found {head.text!r}", lineno, head.col)
    return db
