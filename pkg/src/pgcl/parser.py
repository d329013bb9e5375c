"""Recursive-descent parser for pGCL source files and expressions.

Grammar (ASCII)::

    file    := decl* stmt ";"?
    decl    := "var" IDENT ":" domain ";"
    domain  := "{" INT ("," INT)* "}" | "{" INT ".." INT "}"
    seq     := choice (";" choice)*
    choice  := pchoice ("[]" pchoice)*
    pchoice := atom ("[" expr "]" atom)?
    atom    := "abort" | "skip" | IDENT ":=" expr | IDENT "::" setexpr
             | "if" bexpr "then" seq "else" seq "fi"
             | "do" bexpr "->" seq "od" annot?
             | "label" IDENT ":" atom | "(" seq ")"
    annot   := "@invariant" expr ("@termination" ("auto" | "assumed"))?

``;`` and ``[]`` associate to the right.  Numeric expressions share one
grammar: rational literals ``n/d`` and decimals, variables, ``+ - *``,
unary minus and Iverson brackets ``[bexpr]``.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError
from .model import StateSpace
from .syntax import (
    DC, PC, Abort, Apply, BinOp, BoolConst, BoolOp, Cmp, If, In, Iverson, Label,
    Loop, LoopAnnotation, Neg, Not, Num, Seq, SetDC, SetDiff, SetLit, Skip, Var,
)

KEYWORDS = {
    "var", "abort", "skip", "if", "then", "else", "fi", "do", "od",
    "true", "false", "in", "label",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(\#|--)[^\n]*)
  | (?P<dec>\d+\.\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<annot>@invariant|@termination)
  | (?P<sym>\[\s*\]|:=|::|:∈|\.\.|->|\|-|!=|<=|>=|[:;,\[\](){}+\-*/\\=<>!&|])
    """,
    re.VERBOSE,
)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        tok = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("kw" if tok in KEYWORDS else "ident", tok, line, col))
        elif kind == "sym":
            if tok.startswith("["):
                tok = "[]" if tok != "[" else "["
            elif tok == ":∈":
                tok = "::"
            tokens.append(Token("sym", tok, line, col))
        elif kind in ("int", "dec", "annot"):
            tokens.append(Token(kind, tok, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text: str, space: StateSpace | None = None):
        self.tokens = tokenize(text)
        self.i = 0
        self.space = space
        self.known = set(space.names) if space is not None else None

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text, kind=None) -> bool:
        t = self.tok
        return t.text == text and t.kind in ((kind,) if kind else ("sym", "kw", "annot"))

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, text) -> Token:
        if not self.at(text):
            what = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {what!r}")
        t = self.tok
        self.i += 1
        return t

    def accept(self, text) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def check_var(self, tok: Token):
        if self.known is not None and tok.text not in self.known:
            raise ParseError(f"undeclared variable {tok.text!r}", tok.line, tok.col)

    def finish(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")

    # -- declarations ------------------------------------------------------

    def int_literal(self) -> int:
        neg = self.accept("-")
        if self.tok.kind != "int":
            self.error("expected integer")
        v = int(self.tok.text)
        self.i += 1
        return -v if neg else v

    def declarations(self) -> StateSpace:
        decls = []
        seen = set()
        while self.at("var", "kw"):
            self.i += 1
            name = self.ident()
            if name.text in seen:
                raise ParseError(f"variable {name.text!r} declared twice", name.line, name.col)
            seen.add(name.text)
            self.expect(":")
            start = self.expect("{")
            first = self.int_literal()
            if self.accept(".."):
                last = self.int_literal()
                if last < first:
                    raise ParseError(f"empty range {first}..{last}", start.line, start.col)
                values = list(range(first, last + 1))
            else:
                values = [first]
                while self.accept(","):
                    values.append(self.int_literal())
                if len(set(values)) != len(values):
                    raise ParseError("repeated value in domain", start.line, start.col)
            self.expect("}")
            self.expect(";")
            decls.append((name.text, tuple(values)))
        if not decls:
            self.error("expected at least one 'var' declaration")
        space = StateSpace(tuple(decls))
        self.space = space
        self.known = set(space.names)
        return space

    # -- statements --------------------------------------------------------

    def _ends_block(self, tok) -> bool:
        return tok.kind == "eof" or tok.text in (")", "fi", "else", "od") and tok.kind in ("sym", "kw")

    def seq(self):
        loc = (self.tok.line, self.tok.col)
        first = self.choice()
        if self.at(";") and not self._ends_block(self.peek()):
            self.i += 1
            return Seq(first, self.seq(), loc=loc)
        return first

    def choice(self):
        loc = (self.tok.line, self.tok.col)
        left = self.pchoice()
        if self.accept("[]"):
            return DC(left, self.choice(), loc=loc)
        return left

    def pchoice(self):
        loc = (self.tok.line, self.tok.col)
        left = self.atom()
        if self.accept("["):
            p = self.expr()
            self.expect("]")
            return PC(left, p, self.atom(), loc=loc)
        return left

    def atom(self):
        t = self.tok
        loc = (t.line, t.col)
        if self.accept("abort"):
            return Abort(loc=loc)
        if self.accept("skip"):
            return Skip(loc=loc)
        if self.accept("("):
            s = self.seq()
            self.accept(";")
            self.expect(")")
            return s
        if self.accept("if"):
            g = self.bexpr()
            self.expect("then")
            a = self.seq()
            self.accept(";")
            self.expect("else")
            b = self.seq()
            self.accept(";")
            self.expect("fi")
            return If(g, a, b, loc=loc)
        if self.accept("do"):
            g = self.bexpr()
            self.expect("->")
            body = self.seq()
            self.accept(";")
            self.expect("od")
            ann = None
            if self.tok.kind == "annot" and self.tok.text == "@invariant":
                self.i += 1
                inv = self.expr()
                term = "auto"
                if self.tok.kind == "annot" and self.tok.text == "@termination":
                    self.i += 1
                    mode = self.ident()
                    if mode.text not in ("auto", "assumed"):
                        raise ParseError("termination must be 'auto' or 'assumed'", mode.line, mode.col)
                    term = mode.text
                ann = LoopAnnotation(inv, term)
            elif self.tok.kind == "annot":
                self.error("@termination requires a preceding @invariant")
            return Loop(g, body, ann, loc=loc)
        if self.accept("label"):
            name = self.ident()
            self.expect(":")
            return Label(name.text, self.atom(), loc=loc)
        if t.kind == "ident":
            self.i += 1
            self.check_var(t)
            if self.accept(":="):
                return Apply(t.text, self.expr(), loc=loc)
            if self.accept("::"):
                return SetDC(t.text, self.setexpr(), loc=loc)
            self.error("expected ':=' or '::' after variable")
        self.error(f"expected a statement, found {t.text or 'end of input'!r}")

    # -- numeric expressions -------------------------------------------------

    def expr(self):
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.at("*"):
            self.i += 1
            e = BinOp("*", e, self.unary())
        return e

    def unary(self):
        if self.accept("-"):
            e = self.unary()
            if type(e) is Num:
                return Num(-e.value)
            return Neg(e)
        return self.num_atom()

    def num_atom(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            v = Fraction(int(t.text))
            if self.at("/"):
                self.i += 1
                if self.tok.kind != "int":
                    self.error("expected integer denominator")
                d = int(self.tok.text)
                if d == 0:
                    self.error("zero denominator")
                self.i += 1
                v = v / d
            return Num(v)
        if t.kind == "dec":
            self.i += 1
            return Num(Fraction(t.text))
        if t.kind == "ident":
            self.i += 1
            self.check_var(t)
            return Var(t.text, loc=(t.line, t.col))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("["):
            b = self.bexpr()
            self.expect("]")
            return Iverson(b)
        if self.at("true", "kw") or self.at("false", "kw"):
            self.error("boolean constant in numeric position; use [true]")
        self.error(f"expected an expression, found {t.text or 'end of input'!r}")

    # -- boolean expressions -------------------------------------------------

    def bexpr(self):
        e = self.band()
        while self.accept("|"):
            e = BoolOp("|", e, self.band())
        return e

    def band(self):
        e = self.bnot()
        while self.accept("&"):
            e = BoolOp("&", e, self.bnot())
        return e

    def bnot(self):
        if self.accept("!"):
            return Not(self.bnot())
        return self.batom()

    def batom(self):
        if self.accept("true"):
            return BoolConst(True)
        if self.accept("false"):
            return BoolConst(False)
        start = self.i
        if self.at("("):
            try:
                return self._comparison(backtrack=True)
            except (_Backtrack, ParseError):
                self.i = start
            self.expect("(")
            b = self.bexpr()
            self.expect(")")
            return b
        return self._comparison(backtrack=False)

    _CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")

    def _comparison(self, backtrack):
        left = self.expr()
        if self.tok.kind == "sym" and self.tok.text in self._CMP_OPS:
            op = self.tok.text
            self.i += 1
            return Cmp(op, left, self.expr())
        if self.accept("in"):
            return In(left, self.setexpr())
        if backtrack:
            raise _Backtrack()
        self.error("expected a comparison")

    # -- set expressions -----------------------------------------------------

    def setexpr(self):
        e = self.set_atom()
        while self.accept("\\"):
            e = SetDiff(e, self.set_atom())
        return e

    def set_atom(self):
        if self.accept("("):
            e = self.setexpr()
            self.expect(")")
            return e
        self.expect("{")
        items = []
        if not self.at("}"):
            items.append(self.expr())
            while self.accept(","):
                items.append(self.expr())
        self.expect("}")
        return SetLit(tuple(items))


def parse(text: str):
    """Parse a whole source file into ``(StateSpace, Program)``."""
    p = Parser(text)
    space = p.declarations()
    prog = p.seq()
    p.accept(";")
    p.finish()
    return space, prog


def parse_program(text: str, space: StateSpace | None = None):
    p = Parser(text, space)
    prog = p.seq()
    p.accept(";")
    p.finish()
    return prog


def parse_expr(text: str, space: StateSpace | None = None):
    p = Parser(text, space)
    e = p.expr()
    p.finish()
    return e


def parse_bexpr(text: str, space: StateSpace | None = None):
    p = Parser(text, space)
    e = p.bexpr()
    p.finish()
    return e
