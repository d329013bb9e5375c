"""Empirical healthiness checks for a program's wp and wlp transformers.

Each check samples sound expectations (the constants 0 and 1, every
singleton indicator, every 0/1 expectation on spaces of at most 12 states,
then seeded random draws) and reports the first violation found.

Programs with loops are checked at a pinned iteration depth (tolerance 0,
``LOOP_DEPTH`` steps) unless exact mode is on.  A Kleene iterate at fixed
depth is itself built from healthy primitives, so every condition must hold
exactly there, and comparing iterates stopped at different depths is
avoided.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ._rational import ONE, ZERO, to_fraction, to_q
from .engine import DEFAULT_CONFIG, FixpointConfig, transform_values
from .model import Expectation
from .syntax import has_loops

LOOP_DEPTH = 64
EXHAUSTIVE_MAX_STATES = 12
SCALE_FACTORS = (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 2), Fraction(2), Fraction(7, 4))
LATTICE = tuple(Fraction(k, 4) for k in range(5))
_STRETCH = (Fraction(2), Fraction(5, 2), Fraction(3))


@dataclass
class CheckResult:
    name: str
    passed: bool = True
    counterexample: Optional[dict] = None
    samples: int = 0

    def __bool__(self):
        return self.passed

    def describe(self) -> str:
        if self.passed:
            return f"{self.name}: pass ({self.samples} samples)"
        return f"{self.name}: FAIL {self.counterexample}"


@dataclass
class HealthReport:
    feasible: CheckResult
    monotone: CheckResult
    scaling: CheckResult
    well_def: CheckResult

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks())

    def checks(self):
        return (self.feasible, self.monotone, self.scaling, self.well_def)


def _check_config(prog, cfg: FixpointConfig) -> FixpointConfig:
    if has_loops(prog) and not cfg.exact:
        return FixpointConfig(tolerance=0, max_iter=min(cfg.max_iter, LOOP_DEPTH), exact=False)
    return cfg


class _Evaluator:
    """Memoised raw transforms, shared by the checks of one report."""

    def __init__(self, prog, space, cfg):
        self.prog, self.space, self.cfg = prog, space, _check_config(prog, cfg)
        self.memo: dict = {}

    def __call__(self, flag, values):
        key = (flag, tuple(values))
        out = self.memo.get(key)
        if out is None:
            out = transform_values(self.prog, flag, self.space, list(values), self.cfg)
            if len(self.memo) > 20_000:
                self.memo.clear()
            self.memo[key] = out
        return out


def _raw_samples(space, trials: int, rng: random.Random):
    lattice = [to_q(v) for v in LATTICE]
    stretch = [to_q(v) for v in _STRETCH]
    n = space.size
    yield [ZERO] * n
    yield [ONE] * n
    for i in range(n):
        v = [ZERO] * n
        v[i] = ONE
        yield v
    if n <= EXHAUSTIVE_MAX_STATES:
        for bits in itertools.product((ZERO, ONE), repeat=n):
            if 1 < sum(1 for b in bits if b) < n:
                yield list(bits)
    for _ in range(trials):
        v = [rng.choice(lattice) for _ in range(n)]
        if rng.random() < 0.3:
            c = rng.choice(stretch)
            v = [c * x for x in v]
        yield v


def sample_expectations(space, trials: int, rng: random.Random):
    """Boundary, singleton, exhaustive-standard and random sound expectations."""
    for v in _raw_samples(space, trials, rng):
        yield Expectation(space, [to_fraction(x) for x in v])


def _weaken(q, rng: random.Random):
    """Some ``p`` with ``p <= q`` pointwise."""
    lattice = [to_q(v) for v in LATTICE]
    out = []
    for v in q:
        d = rng.choice(lattice)
        out.append(v - d if v > d else ZERO)
    return out


def _strs(values):
    return [str(to_fraction(v)) for v in values]


def _cex(flag, post, state, **values):
    return {"semantics": "wp" if flag else "wlp", "post": _strs(post), "state": state,
            **{k: (_strs(v) if isinstance(v, list) else str(to_fraction(v))) for k, v in values.items()}}


def _feasible(ev, flag, trials, seed):
    res = CheckResult("feasible")
    rng = random.Random(seed)
    for post in _raw_samples(ev.space, trials, rng):
        res.samples += 1
        out = ev(flag, post)
        b = max(post)
        for s, v in zip(ev.space.states, out):
            if v < 0 or v > b:
                res.passed = False
                res.counterexample = _cex(flag, post, s, value=v, bound=b)
                return res
    return res


def _monotone(ev, flag, trials, seed):
    res = CheckResult("monotone")
    rng = random.Random(seed)
    for q in _raw_samples(ev.space, trials, rng):
        p = _weaken(q, rng)
        res.samples += 1
        tp, tq = ev(flag, p), ev(flag, q)
        for s, a, b in zip(ev.space.states, tp, tq):
            if a > b:
                res.passed = False
                res.counterexample = _cex(flag, q, s, smaller_post=p, lhs=a, rhs=b)
                return res
    return res


def _scaling(ev, flag, trials, seed, slack):
    res = CheckResult("scaling")
    rng = random.Random(seed)
    factors = [to_q(c) for c in SCALE_FACTORS]
    slack = to_q(slack)
    for post in _raw_samples(ev.space, trials, rng):
        c = rng.choice(factors)
        res.samples += 1
        base = ev(flag, post)
        scaled = ev(flag, [c * v for v in post])
        for s, a, b in zip(ev.space.states, base, scaled):
            d = c * a - b
            if (d if d >= 0 else -d) > slack * max(ONE, c):
                res.passed = False
                res.counterexample = _cex(flag, post, s, factor=c, scaled_before=c * a, scaled_after=b)
                return res
    return res


def _below(ev, trials, seed):
    res = CheckResult("wp <= wlp")
    rng = random.Random(seed)
    for post in _raw_samples(ev.space, trials, rng):
        res.samples += 1
        lo, hi = ev(True, post), ev(False, post)
        for s, a, b in zip(ev.space.states, lo, hi):
            if a > b:
                res.passed = False
                res.counterexample = _cex(True, post, s, wp=a, wlp=b)
                return res
    return res


def _scaling_slack(prog, cfg) -> Fraction:
    # pinned-depth iterates scale exactly; exact mode falling back to
    # tolerance-stopped iteration does not
    ev_cfg = _check_config(prog, cfg)
    if has_loops(prog) and ev_cfg.tolerance > 0:
        return 2 * ev_cfg.tolerance
    return Fraction(0)


def check_feasible(prog, space, flag: bool, trials: int = 100, seed: int = 0,
                   cfg: FixpointConfig = DEFAULT_CONFIG) -> CheckResult:
    return _feasible(_Evaluator(prog, space, cfg), bool(flag), trials, seed)


def check_monotone(prog, space, flag: bool, trials: int = 100, seed: int = 0,
                   cfg: FixpointConfig = DEFAULT_CONFIG) -> CheckResult:
    return _monotone(_Evaluator(prog, space, cfg), bool(flag), trials, seed)


def check_scaling(prog, space, flag: bool, trials: int = 100, seed: int = 0,
                  cfg: FixpointConfig = DEFAULT_CONFIG) -> CheckResult:
    return _scaling(_Evaluator(prog, space, cfg), bool(flag), trials, seed, _scaling_slack(prog, cfg))


def check_wp_below_wlp(prog, space, trials: int = 100, seed: int = 0,
                       cfg: FixpointConfig = DEFAULT_CONFIG) -> CheckResult:
    return _below(_Evaluator(prog, space, cfg), trials, seed)


def _merge(name, results) -> CheckResult:
    out = CheckResult(name)
    for r in results:
        out.samples += r.samples
        if not r.passed and out.passed:
            out.passed = False
            out.counterexample = r.counterexample
    return out


def check_well_def(prog, space, trials: int = 100, seed: int = 0,
                   cfg: FixpointConfig = DEFAULT_CONFIG) -> HealthReport:
    """All conditions for both semantics, plus ``wp <= wlp``."""
    ev = _Evaluator(prog, space, cfg)
    slack = _scaling_slack(prog, cfg)
    flags = (True, False)
    return HealthReport(
        feasible=_merge("feasible", [_feasible(ev, f, trials, seed) for f in flags]),
        monotone=_merge("monotone", [_monotone(ev, f, trials, seed) for f in flags]),
        scaling=_merge("scaling", [_scaling(ev, f, trials, seed, slack) for f in flags]),
        well_def=_below(ev, trials, seed),
    )
