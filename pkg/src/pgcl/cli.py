"""``pgcl`` command-line interface.

Exit codes: 0 holds, 1 property fails, 2 parse or usage error,
3 semantic error, 4 unsupported analysis.
"""
from __future__ import annotations

import functools
import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from ._rational import to_fraction
from .engine import FixpointConfig, expectation_of, transform
from .errors import (
    ParseError, PgclError, SemanticError, SpaceMismatch, SpecRejected, UnsupportedProgram, VCGError,
)
from .forward import refines_exact, refines_falsify, resolutions
from .health import check_well_def
from .model import Expectation, first_violation
from .parser import parse, parse_expr
from .syntax import has_loops
from . import vcg as _vcg

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_SEMANTIC, EXIT_UNSUPPORTED = 0, 1, 2, 3, 4


def _exit_code(err: Exception) -> int:
    if isinstance(err, SpecRejected):
        return EXIT_FAIL
    if isinstance(err, (ParseError, SpaceMismatch)):
        return EXIT_PARSE
    if isinstance(err, SemanticError):
        return EXIT_SEMANTIC
    if isinstance(err, (UnsupportedProgram, VCGError)):
        return EXIT_UNSUPPORTED
    return EXIT_SEMANTIC


def _handled(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except PgclError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(_exit_code(e))
        except OSError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_PARSE)
        sys.exit(code or EXIT_OK)
    return wrapper


def _rational(ctx, param, value):
    if value is None:
        return None
    try:
        q = Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"not a rational number: {value!r}")
    if q < 0:
        raise click.BadParameter("must be nonnegative")
    return q


def _engine_options(fn):
    fn = click.option("--tol", callback=_rational, default="1/1000000000", show_default=True,
                      help="Fixed-point tolerance (rational).")(fn)
    fn = click.option("--max-iter", type=click.IntRange(min=1), default=100_000, show_default=True)(fn)
    fn = click.option("--exact", is_flag=True, help="Solve loop fixed points by policy iteration.")(fn)
    fn = click.option("--output", type=click.Choice(["text", "json"]), default="text", show_default=True)(fn)
    fn = click.option("--decimal", type=click.IntRange(min=1), default=None,
                      help="Also print an approximate decimal column with N digits.")(fn)
    return fn


def _config(tol, max_iter, exact) -> FixpointConfig:
    return FixpointConfig(tolerance=tol, max_iter=max_iter, exact=exact)


def _load(path):
    return parse(Path(path).read_text())


def _expectation(text, space) -> Expectation:
    return expectation_of(parse_expr(text, space), space)


def fmt(q) -> str:
    q = to_fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _approx(q, digits) -> str:
    q = to_fraction(q)
    whole, rem = divmod(abs(q.numerator), q.denominator)
    frac = (rem * 10**digits + q.denominator // 2) // q.denominator
    if frac == 10**digits:
        whole, frac = whole + 1, 0
    return f"~{'-' if q < 0 else ''}{whole}.{frac:0{digits}d}"


def _table_json(e: Expectation, space):
    return [{"state": dict(zip(space.names, s)), "value_num": v.numerator, "value_den": v.denominator}
            for s, v in zip(space.states, e.values)]


def _print_table(e: Expectation, space, decimal=None, title="value"):
    rows = [(space.format_state(s), fmt(v), _approx(v, decimal) if decimal else "")
            for s, v in zip(space.states, e.values)]
    w0 = max([len(r[0]) for r in rows] + [5])
    w1 = max([len(r[1]) for r in rows] + [len(title)])
    head = f"{'state':<{w0}}  {title:<{w1}}"
    if decimal:
        head += "  approx"
    click.echo(head)
    for a, b, c in rows:
        click.echo(f"{a:<{w0}}  {b:<{w1}}  {c}".rstrip())


def _loop_info(trace):
    out = []
    for values, iterations, converged, residual, direction, method in trace:
        out.append({"iterations": iterations, "converged": converged, "residual": fmt(residual),
                    "direction": direction, "method": method})
    return out


def _emit_json(command, verdict, table=(), obligations=(), **extra):
    click.echo(json.dumps({"command": command, "verdict": verdict, "table": list(table),
                           "obligations": list(obligations), **extra}, indent=2))


@click.group()
@click.version_option(package_name="pgcl")
def main():
    """Exact expectation-transformer semantics for pGCL programs."""


def _transform_cmd(name, flag):
    @main.command(name)
    @click.argument("file", type=click.Path(exists=True, dir_okay=False))
    @click.option("--post", required=True, help="Post-expectation.")
    @click.option("--liberal", is_flag=True, help="Use liberal semantics (wlp).")
    @_engine_options
    @_handled
    def cmd(file, post, liberal, tol, max_iter, exact, output, decimal):
        space, prog = _load(file)
        q = _expectation(post, space)
        strict = flag and not liberal
        trace: list = []
        res = transform(prog, strict, q, _config(tol, max_iter, exact), trace)
        loops = _loop_info(trace)
        sem = "wp" if strict else "wlp"
        if output == "json":
            _emit_json(sem, "ok", _table_json(res, space), loops=loops)
        else:
            _print_table(res, space, decimal, title=sem)
            for i, info in enumerate(loops, 1):
                click.echo(f"loop evaluation {i}: {info['method']}, {info['iterations']} iterations, "
                           f"converged={info['converged']}, residual={info['residual']}")
        return EXIT_OK
    return cmd


cmd_wp = _transform_cmd("wp", True)
cmd_wlp = _transform_cmd("wlp", False)


@main.command("check")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--pre", required=True)
@click.option("--post", required=True)
@click.option("--liberal", is_flag=True)
@_engine_options
@_handled
def cmd_check(file, pre, post, liberal, tol, max_iter, exact, output, decimal):
    """Exit 0 iff PRE entails the pre-expectation of POST."""
    space, prog = _load(file)
    p, q = _expectation(pre, space), _expectation(post, space)
    w = transform(prog, not liberal, q, _config(tol, max_iter, exact))
    bad = first_violation(p, w)
    verdict = "holds" if bad is None else "fails"
    if output == "json":
        extra = {}
        if bad is not None:
            s, a, b = bad
            extra["counterexample"] = {"state": dict(zip(space.names, s)), "pre": fmt(a), "computed": fmt(b)}
        _emit_json("check", verdict, _table_json(w, space), **extra)
    elif bad is None:
        click.echo("HOLDS")
    else:
        s, a, b = bad
        click.echo(f"FAILS at {space.format_state(s)}: pre = {fmt(a)} > {'wlp' if liberal else 'wp'} = {fmt(b)}")
    return EXIT_OK if bad is None else EXIT_FAIL


@main.command("refine")
@click.argument("file_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("file_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["exact", "falsify"]), default="exact", show_default=True)
@click.option("--samples", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_engine_options
@_handled
def cmd_refine(file_a, file_b, mode, samples, seed, tol, max_iter, exact, output, decimal):
    """Does FILE_B refine FILE_A (wp a Q <= wp b Q for all sound Q)?"""
    space_a, a = _load(file_a)
    space_b, b = _load(file_b)
    if mode == "exact":
        v = refines_exact(a, b, space_a, space_b)
    else:
        v = refines_falsify(a, b, space_a, samples=samples, seed=seed,
                            cfg=_config(tol, max_iter, exact), space_b=space_b)
    verdict = "refines" if v.holds else "does not refine"
    if output == "json":
        extra = {"mode": mode, "checked": v.checked}
        table = []
        if v.counterexample is not None:
            c = v.counterexample
            table = _table_json(c.post, space_a)
            extra["counterexample"] = {"state": dict(zip(space_a.names, c.state)),
                                       "wp_a": fmt(c.lhs), "wp_b": fmt(c.rhs)}
        _emit_json("refine", verdict, table, **extra)
    else:
        click.echo(verdict.upper() + ("" if mode == "exact" or not v.holds else " (no counterexample found)"))
        if v.counterexample is not None:
            c = v.counterexample
            click.echo(f"at {space_a.format_state(c.state)}: wp a Q = {fmt(c.lhs)} > wp b Q = {fmt(c.rhs)}")
            click.echo("with Q =")
            _print_table(c.post, space_a, decimal, title="Q")
    return EXIT_OK if v.holds else EXIT_FAIL


@main.command("health")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--samples", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_engine_options
@_handled
def cmd_health(file, samples, seed, tol, max_iter, exact, output, decimal):
    """Feasibility, monotonicity, scaling and wp <= wlp on sampled posts."""
    space, prog = _load(file)
    rep = check_well_def(prog, space, trials=samples, seed=seed, cfg=_config(tol, max_iter, exact))
    verdict = "pass" if rep.passed else "fail"
    if output == "json":
        checks = [{"name": c.name, "passed": c.passed, "samples": c.samples,
                   "counterexample": c.counterexample and {k: (dict(zip(space.names, v)) if k == "state" else v)
                                                           for k, v in c.counterexample.items()}}
                  for c in rep.checks()]
        _emit_json("health", verdict, checks=checks)
    else:
        for c in rep.checks():
            click.echo(c.describe())
        if has_loops(prog) and not exact:
            click.echo("(loops checked at a fixed iteration depth)")
        click.echo(verdict.upper())
    return EXIT_OK if rep.passed else EXIT_FAIL


def _obligation_json(o, space):
    d = {"kind": o.kind, "origin": o.origin, "status": o.status, "slack": fmt(o.slack)}
    if o.loc:
        d["loc"] = list(o.loc)
    if o.counterexample is not None:
        s, a, b = o.counterexample
        d["counterexample"] = {"state": dict(zip(space.names, s)) if s is not None else None,
                               "lhs": fmt(a) if a is not None else None,
                               "rhs": fmt(b) if b is not None else None}
    return d


@main.command("vcg")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--specs", "specfile", type=click.Path(exists=True, dir_okay=False),
              help="Specification file (spec/health lines over labelled subtrees).")
@click.option("--pre", required=True)
@click.option("--post", required=True)
@_engine_options
@_handled
def cmd_vcg(file, specfile, pre, post, tol, max_iter, exact, output, decimal):
    """Generate and discharge verification conditions for PRE |= wp FILE POST."""
    space, prog = _load(file)
    cfg = _config(tol, max_iter, exact)
    if specfile:
        db = _vcg.load_specs(Path(specfile).read_text(), space, prog, cfg)
    else:
        db = _vcg.SpecDB(space, cfg)
    goal = _vcg.Triple(_expectation(pre, space), prog, _expectation(post, space))
    res = _vcg.prove(goal, db, cfg)
    if output == "json":
        _emit_json("vcg", _vcg.verdict(res.obligations), _table_json(res.pre, space),
                   [_obligation_json(o, space) for o in res.obligations])
    else:
        click.echo(_vcg.report(res.obligations, space))
    return EXIT_OK if res.verified else EXIT_FAIL


@main.command("simulate-free")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--state", "only", default=None, help="Restrict to one state, e.g. 'h=0,l=1'.")
@click.option("--output", type=click.Choice(["text", "json"]), default="text", show_default=True)
@_handled
def cmd_simulate(file, only, output):
    """Print the demonic resolution sets of a loop-free program."""
    space, prog = _load(file)
    if has_loops(prog):
        raise UnsupportedProgram("simulate-free needs a loop-free program")
    states = space.states
    if only:
        try:
            kv = dict(item.split("=") for item in only.replace(" ", "").split(","))
            states = [space.state(**{k: int(v) for k, v in kv.items()})]
        except (ValueError, KeyError, TypeError) as e:
            raise ParseError(f"bad --state {only!r}: {e}")
    out = []
    for s in states:
        dists = sorted(resolutions(prog, space, s), key=lambda d: d.mass)
        out.append((s, dists))
    if output == "json":
        rows = [{"state": dict(zip(space.names, s)),
                 "resolutions": [[{"state": dict(zip(space.names, space.states[t])),
                                   "mass_num": to_fraction(m).numerator, "mass_den": to_fraction(m).denominator}
                                  for t, m in d.mass] for d in dists]}
                for s, dists in out]
        _emit_json("simulate-free", "ok", resolutions=rows)
    else:
        for s, dists in out:
            click.echo(f"{space.format_state(s)}: {len(dists)} resolution(s)")
            for d in dists:
                parts = ", ".join(f"{space.format_state(space.states[t])} -> {fmt(m)}" for t, m in d.mass)
                click.echo(f"  {{{parts}}}" + ("" if d.total() == 1 else f"  (mass {fmt(d.total())})"))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    main()
