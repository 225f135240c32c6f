"""Lexer, parser, scope resolution and pretty-printer for ``.htt`` files.

Grammar (ASCII only, ``--`` comments)::

    file    ::= pragma* decl*
    pragma  ::= "#" NAME
    decl    ::= "postulate" IDENT lparams? ":" term ";"
              | "def" IDENT lparams? ":" term "=" term ";"
    lparams ::= "[" IDENT+ "]"
    term    ::= "fun" IDENT+ "=>" term
              | "(" IDENT+ ":" term ")" "->" term
              | "let" IDENT ":" term "=" term "in" term
              | apps ("->" term)?
    apps    ::= atom+
    atom    ::= IDENT levelargs? | "Set" lvlatom | "(" term ")"
    levelargs ::= "{" level ("," level)* "}"
    level   ::= lvlatom | "lsuc" level | "lmax" level level
    lvlatom ::= NAT | IDENT | "(" level ")"
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from . import core
from .core import App, Const, Decl, Lam, Let, Pi, Sort, Term, Var
from .diagnostics import Span, error
from .level import LevelExpr, LMax, LSuc, LVar, LZero, level_vars, show_level

KEYWORDS = frozenset({"postulate", "def", "fun", "let", "in", "Set", "lsuc", "lmax"})
PRAGMAS = ("with-K", "no-heq-builtins", "no-sigma-builtins")
_ANON = "\0"  # scope entry for the binder of a non-dependent arrow

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<pragma>\#[A-Za-z0-9_'\-]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<nat>[0-9]+)
  | (?P<sym>=>|->|[:;=()\[\]{},])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, nat, sym, pragma, eof
    text: str
    span: Span


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            sp = Span(file, line, col, line, col + 1)
            raise error("ParseError", sp, f"unexpected character {text[pos]!r}")
        kind, lexeme = m.lastgroup, m.group()
        end = m.end()
        if kind == "nl":
            line, line_start = line + 1, end
        elif kind not in ("ws", "comment"):
            if kind == "ident" and lexeme in KEYWORDS:
                kind = "keyword"
            sp = Span(file, line, col, line, col + len(lexeme))
            toks.append(Token(kind, lexeme, sp))
        pos = end
    col = pos - line_start + 1
    toks.append(Token("eof", "", Span(file, line, col, line, col)))
    return toks


# -- surface syntax ----------------------------------------------------------

@dataclass(frozen=True)
class SLevel:
    expr: LevelExpr
    span: Span


@dataclass(frozen=True)
class SIdent:
    name: str
    levels: Optional[tuple[SLevel, ...]]
    span: Span


@dataclass(frozen=True)
class SSet:
    level: SLevel
    span: Span


@dataclass(frozen=True)
class SPi:
    names: tuple[str, ...]
    dom: "STerm"
    cod: "STerm"
    span: Span


@dataclass(frozen=True)
class SArrow:
    dom: "STerm"
    cod: "STerm"
    span: Span


@dataclass(frozen=True)
class SLam:
    names: tuple[str, ...]
    body: "STerm"
    span: Span


@dataclass(frozen=True)
class SApp:
    fn: "STerm"
    arg: "STerm"
    span: Span


@dataclass(frozen=True)
class SLet:
    name: str
    ann: "STerm"
    bound: "STerm"
    body: "STerm"
    span: Span


STerm = Union[SIdent, SSet, SPi, SArrow, SLam, SApp, SLet]


@dataclass(frozen=True)
class SurfaceDecl:
    kind: str
    name: str
    name_span: Span
    level_params: tuple[str, ...]
    type: STerm
    body: Optional[STerm]
    span: Span


@dataclass
class ParsedFile:
    path: str
    pragmas: list[str] = field(default_factory=list)
    decls: list[SurfaceDecl] = field(default_factory=list)


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind in ("sym", "keyword") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(f"expected {text!r}")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.fail("expected an identifier")
        return self.advance()

    def fail(self, what: str):
        t = self.tok
        found = "end of file" if t.kind == "eof" else repr(t.text)
        return error("ParseError", t.span, f"{what}, found {found}")

    # -- file --------------------------------------------------------------

    def file(self, path: str) -> ParsedFile:
        out = ParsedFile(path)
        while self.tok.kind == "pragma":
            t = self.advance()
            name = t.text[1:]
            if name not in PRAGMAS:
                raise error("ParseError", t.span, f"unknown pragma {t.text!r}")
            out.pragmas.append(name)
        while self.tok.kind != "eof":
            out.decls.append(self.decl())
        return out

    def decl(self) -> SurfaceDecl:
        start = self.tok
        if self.at("postulate"):
            kind = core.POSTULATE
        elif self.at("def"):
            kind = core.DEF
        else:
            raise self.fail("expected 'postulate' or 'def'")
        self.advance()
        name = self.ident()
        params: list[str] = []
        if self.at("["):
            self.advance()
            params.append(self.ident().text)
            while self.tok.kind == "ident":
                params.append(self.ident().text)
            self.expect("]")
        self.expect(":")
        ty = self.term()
        body = None
        if kind == core.DEF:
            self.expect("=")
            body = self.term()
        end = self.expect(";")
        return SurfaceDecl(kind, name.text, name.span, tuple(params), ty, body,
                           start.span.to(end.span))

    # -- terms -------------------------------------------------------------

    def binder_group_ahead(self) -> bool:
        if not self.at("("):
            return False
        k = 1
        while self.peek(k).kind == "ident":
            k += 1
        nxt = self.peek(k)
        return k > 1 and nxt.kind == "sym" and nxt.text == ":"

    def term(self) -> STerm:
        start = self.tok
        if self.at("fun"):
            self.advance()
            names = [self.ident().text]
            while self.tok.kind == "ident":
                names.append(self.ident().text)
            self.expect("=>")
            body = self.term()
            return SLam(tuple(names), body, start.span.to(_span(body)))
        if self.at("let"):
            self.advance()
            name = self.ident().text
            self.expect(":")
            ann = self.term()
            self.expect("=")
            bound = self.term()
            self.expect("in")
            body = self.term()
            return SLet(name, ann, bound, body, start.span.to(_span(body)))
        if self.binder_group_ahead():
            self.advance()
            names = []
            while self.tok.kind == "ident":
                names.append(self.ident().text)
            self.expect(":")
            dom = self.term()
            self.expect(")")
            self.expect("->")
            cod = self.term()
            return SPi(tuple(names), dom, cod, start.span.to(_span(cod)))
        lhs = self.apps()
        if self.at("->"):
            self.advance()
            cod = self.term()
            return SArrow(lhs, cod, _span(lhs).to(_span(cod)))
        return lhs

    def atom_ahead(self) -> bool:
        return self.tok.kind == "ident" or self.at("Set") or self.at("(")

    def apps(self) -> STerm:
        if not self.atom_ahead():
            raise self.fail("expected a term")
        t = self.atom()
        while self.atom_ahead():
            a = self.atom()
            t = SApp(t, a, _span(t).to(_span(a)))
        return t

    def atom(self) -> STerm:
        start = self.tok
        if self.tok.kind == "ident":
            self.advance()
            levels = None
            end = start.span
            if self.at("{"):
                self.advance()
                lv = [self.level()]
                while self.at(","):
                    self.advance()
                    lv.append(self.level())
                end = self.expect("}").span
                levels = tuple(lv)
            return SIdent(start.text, levels, start.span.to(end))
        if self.at("Set"):
            self.advance()
            lv = self.level_atom()
            return SSet(lv, start.span.to(lv.span))
        if self.at("("):
            self.advance()
            t = self.term()
            self.expect(")")
            return t
        raise self.fail("expected a term")

    def level(self) -> SLevel:
        start = self.tok
        if self.at("lsuc"):
            self.advance()
            a = self.level()
            return SLevel(LSuc(a.expr), start.span.to(a.span))
        if self.at("lmax"):
            self.advance()
            a = self.level()
            b = self.level()
            return SLevel(LMax(a.expr, b.expr), start.span.to(b.span))
        return self.level_atom()

    def level_atom(self) -> SLevel:
        t = self.tok
        if t.kind == "nat":
            self.advance()
            e: LevelExpr = LZero()
            for _ in range(int(t.text)):
                e = LSuc(e)
            return SLevel(e, t.span)
        if t.kind == "ident":
            self.advance()
            return SLevel(LVar(t.text), t.span)
        if self.at("("):
            self.advance()
            lv = self.level()
            end = self.expect(")")
            return SLevel(lv.expr, t.span.to(end.span))
        raise self.fail("expected a level")


def _span(t: STerm) -> Span:
    return t.span


def parse_text(text: str, path: str = "<input>") -> ParsedFile:
    text = text.replace("\r\n", "\n")
    return Parser(tokenize(text, path)).file(path)


def parse_file(path) -> ParsedFile:
    with open(path, encoding="utf-8") as f:
        return parse_text(f.read(), str(path))


# -- resolution ----------------------------------------------------------------

class _Resolver:
    def __init__(self, globals_: Mapping[str, int], params: tuple[str, ...]):
        self.globals = globals_
        self.params = set(params)

    def level(self, lv: SLevel) -> LevelExpr:
        for v in sorted(level_vars(lv.expr)):
            if v not in self.params:
                raise error("UnboundLevelVar", lv.span, f"level variable {v!r} is not declared")
        return lv.expr

    def term(self, t: STerm, scope: tuple[str, ...]) -> Term:
        match t:
            case SIdent(name, levels, span):
                for depth, bound in enumerate(reversed(scope)):
                    if bound == name:
                        if levels is not None:
                            raise error("LevelArityMismatch", span,
                                        f"local variable {name!r} takes no level arguments")
                        return Var(depth, span)
                if name in self.globals:
                    lv = () if levels is None else tuple(self.level(x) for x in levels)
                    return Const(name, lv, span)
                raise error("UnboundName", span, f"unbound name {name!r}")
            case SSet(level, span):
                return Sort(self.level(level), span)
            case SPi(names, dom, cod, span):
                base = self.term(dom, scope)
                doms = [core.term_shift_subst(base, core.shift_by(k)) for k in range(len(names))]
                body = self.term(cod, scope + names)
                for n, d in zip(reversed(names), reversed(doms)):
                    body = Pi(n, d, body, span)
                return body
            case SArrow(dom, cod, span):
                return Pi("_", self.term(dom, scope), self.term(cod, scope + (_ANON,)), span)
            case SLam(names, body, span):
                out = self.term(body, scope + names)
                for n in reversed(names):
                    out = Lam(n, out, span)
                return out
            case SApp(fn, arg, span):
                return App(self.term(fn, scope), self.term(arg, scope), span)
            case SLet(name, ann, bound, body, span):
                return Let(name, self.term(ann, scope), self.term(bound, scope),
                           self.term(body, scope + (name,)), span)
        raise TypeError(f"not a surface term: {t!r}")


def resolve_decl(d: SurfaceDecl, globals_: Mapping[str, int]) -> Decl:
    r = _Resolver(globals_, d.level_params)
    ty = r.term(d.type, ())
    body = r.term(d.body, ()) if d.body is not None else None
    return Decl(d.name, d.level_params, d.kind, ty, body, span=d.span)


def resolve(decls: Iterable[SurfaceDecl], globals_: Mapping[str, int]) -> list[Decl]:
    """Resolve decls in order; each one sees ``globals_`` and its predecessors."""
    scope = dict(globals_)
    out = []
    for d in decls:
        out.append(resolve_decl(d, scope))
        scope.setdefault(d.name, len(d.level_params))
    return out


# -- pretty-printing -------------------------------------------------------------

def _fresh_name(hint: str, taken: set[str]) -> str:
    base = hint if hint and hint != _ANON and hint not in KEYWORDS else "x"
    if base not in taken:
        return base
    stem = base.rstrip("0123456789")
    k = 1
    while f"{stem}{k}" in taken:
        k += 1
    return f"{stem}{k}"


class Printer:
    def __init__(self, globals_: Iterable[str] = ()):
        self.globals = set(globals_) | set(KEYWORDS)

    def term(self, t: Term, names: tuple[str, ...] = ()) -> str:
        return self._term(t, list(names))

    def _bind(self, hint: str, names: list[str]) -> str:
        return _fresh_name(hint, self.globals | set(names))

    def _term(self, t: Term, names: list[str]) -> str:
        match t:
            case Lam():
                bound = []
                while isinstance(t, Lam):
                    n = self._bind(t.name, names)
                    bound.append(n)
                    names = names + [n]
                    t = t.body
                return f"fun {' '.join(bound)} => {self._term(t, names)}"
            case Pi(x, a, b):
                if 0 not in core.free_vars(b):
                    return f"{self._apps(a, names)} -> {self._term(b, names + [_ANON])}"
                n = self._bind(x, names)
                return f"({n} : {self._term(a, names)}) -> {self._term(b, names + [n])}"
            case Let(x, a, v, b):
                n = self._bind(x, names)
                return (f"let {n} : {self._term(a, names)} = {self._term(v, names)} "
                        f"in {self._term(b, names + [n])}")
        return self._apps(t, names)

    def _apps(self, t: Term, names: list[str]) -> str:
        if isinstance(t, App):
            head, args = core.spine(t)
            return " ".join([self._atom(head, names)] + [self._atom(a, names) for a in args])
        if isinstance(t, Sort):
            return f"Set {show_level(t.level, True)}"
        return self._atom(t, names)

    def _atom(self, t: Term, names: list[str]) -> str:
        match t:
            case Var(i):
                if i >= len(names):
                    return f"#{i}"
                return names[len(names) - 1 - i]
            case Const(name, levels):
                if not levels:
                    return name
                return f"{name} {{{', '.join(show_level(lv) for lv in levels)}}}"
            case Sort(level):
                return f"(Set {show_level(level, True)})"
        return f"({self._term(t, names)})"

    def decl(self, d: Decl) -> str:
        kw = core.DEF if d.kind == core.DEF else core.POSTULATE
        params = f" [{' '.join(d.level_params)}]" if d.level_params else ""
        head = f"{kw} {d.name}{params} : {self.term(d.type)}"
        if d.body is not None:
            head += f"\n  = {self.term(d.body)}"
        return head + ";"


def show_term(t: Term, names: Iterable[str] = (), globals_: Iterable[str] = ()) -> str:
    return Printer(globals_).term(t, tuple(names))


def pretty_module(pragmas: Iterable[str], decls: Iterable[Decl], globals_: Iterable[str] = ()) -> str:
    decls = list(decls)
    p = Printer(list(globals_) + [d.name for d in decls])
    lines = [f"#{x}" for x in pragmas]
    if lines:
        lines.append("")
    lines += [p.decl(d) + "\n" for d in decls]
    return "\n".join(lines)
