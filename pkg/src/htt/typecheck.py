"""Bidirectional type checking of terms, declarations and whole files."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional

from . import core
from .core import (
    App, Const, Decl, Lam, Let, Pi, Signature, Sort, Term, Var,
    HEQ_BUILTINS, K_BUILTINS, SIGMA_BUILTINS,
)
from .diagnostics import Diagnostic, HTTError, Span, error
from .level import LevelNF
from .nbe import Evaluator, StepBudgetExceeded, Value, VPi, VSort, fresh
from .surface import ParsedFile, parse_text, resolve_decl, show_term

_NOWHERE = Span("<unknown>", 1, 1, 1, 1)


@dataclass(frozen=True)
class CheckOptions:
    with_k: bool = False
    allow_heq_builtins: bool = True
    allow_sigma_builtins: bool = True

    @classmethod
    def from_pragmas(cls, pragmas: Iterable[str]) -> "CheckOptions":
        ps = set(pragmas)
        return cls(
            with_k="with-K" in ps,
            allow_heq_builtins="no-heq-builtins" not in ps,
            allow_sigma_builtins="no-sigma-builtins" not in ps,
        )

    @classmethod
    def everything(cls) -> "CheckOptions":
        return cls(with_k=True)

    def gate(self, name: str) -> Optional[str]:
        """Diagnostic class if built-in ``name`` is unavailable, else None."""
        if name in HEQ_BUILTINS and not self.allow_heq_builtins:
            return "BuiltinDisabled"
        if name in SIGMA_BUILTINS and not self.allow_sigma_builtins:
            return "BuiltinDisabled"
        if name in K_BUILTINS and not self.with_k:
            return "KDisabled"
        return None


@dataclass(frozen=True)
class Context:
    names: tuple[str, ...] = ()
    types: tuple[Value, ...] = ()
    env: tuple[Value, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.env)

    def bind(self, name: str, ty: Value) -> "Context":
        return Context(self.names + (name,), self.types + (ty,), self.env + (fresh(self.depth),))

    def define(self, name: str, ty: Value, val: Value) -> "Context":
        return Context(self.names + (name,), self.types + (ty,), self.env + (val,))


class Checker:
    def __init__(self, sig: Signature, opts: CheckOptions = CheckOptions(),
                 level_params: Iterable[str] = (), budget: Optional[int] = None,
                 fallback: Span = _NOWHERE):
        self.sig = sig
        self.opts = opts
        self.level_params = tuple(level_params)
        self.ev = Evaluator(sig, budget)
        self.fallback = fallback

    # -- helpers -----------------------------------------------------------

    def where(self, t: Term) -> Span:
        return t.span or self.fallback

    def show(self, ctx: Context, v: Value) -> str:
        return show_term(self.ev.quote(ctx.depth, v), ctx.names, self.sig.names())

    def eval(self, ctx: Context, t: Term) -> Value:
        return self.ev.eval(t, ctx.env)

    def conv(self, ctx: Context, a: Value, b: Value) -> bool:
        return self.ev.conv(ctx.depth, a, b)

    def sort_of(self, ctx: Context, t: Term) -> LevelNF:
        ty = self.infer(ctx, t)
        if not isinstance(ty, VSort):
            raise error("TypeMismatch", self.where(t), "expected a type",
                        expected="Set _", actual=self.show(ctx, ty))
        return ty.level

    # -- judgements --------------------------------------------------------

    def infer(self, ctx: Context, t: Term) -> Value:
        match t:
            case Var(i):
                return ctx.types[ctx.depth - 1 - i]
            case Sort(level):
                return VSort(self.ev.eval(Sort(level)).level.suc())
            case Pi(x, a, b):
                la = self.sort_of(ctx, a)
                lb = self.sort_of(ctx.bind(x, self.eval(ctx, a)), b)
                return VSort(la.max(lb))
            case Lam():
                raise error("TypeMismatch", self.where(t),
                            "cannot infer the type of an unannotated function; use let")
            case App(f, a):
                fty = self.infer(ctx, f)
                if not isinstance(fty, VPi):
                    raise error("NotAFunction", self.where(f),
                                "applied term is not a function", actual=self.show(ctx, fty))
                self.check(ctx, a, fty.dom)
                return self.ev.instantiate(fty.cod, self.eval(ctx, a))
            case Let(x, ann, v, b):
                self.sort_of(ctx, ann)
                annv = self.eval(ctx, ann)
                self.check(ctx, v, annv)
                return self.infer(ctx.define(x, annv, self.eval(ctx, v)), b)
            case Const(name, levels):
                d = self.resolve_const(t)
                lenv = dict(zip(d.level_params, (self.ev.eval(Sort(lv)).level for lv in levels)))
                return self.ev.eval(d.type, (), lenv)
        raise TypeError(f"not a term: {t!r}")

    def resolve_const(self, t: Const) -> Decl:
        d = self.sig.get(t.name)
        if d is None:
            raise error("UnboundName", self.where(t), f"unknown constant {t.name!r}")
        if len(t.levels) != len(d.level_params):
            raise error("LevelArityMismatch", self.where(t),
                        f"{t.name} expects {len(d.level_params)} level argument(s), "
                        f"got {len(t.levels)}")
        for name in sorted({t.name} | self.sig.closure(t.name)):
            cls = self.opts.gate(name)
            if cls is None:
                continue
            via = "" if name == t.name else f" (used by {t.name})"
            if cls == "KDisabled":
                msg = f"{name}{via} relies on Axiom K; enable it with the #with-K pragma"
            else:
                msg = f"built-in {name}{via} is disabled by a pragma of this file"
            raise error(cls, self.where(t), msg)
        return d

    def check(self, ctx: Context, t: Term, expected: Value) -> None:
        match t, expected:
            case Lam(x, body), VPi(_, dom, cod):
                v = fresh(ctx.depth)
                self.check(ctx.bind(x, dom), body, self.ev.instantiate(cod, v))
                return
            case Lam(), _:
                raise error("TypeMismatch", self.where(t), "function given where a non-function is expected",
                            expected=self.show(ctx, expected))
            case Let(x, ann, v, b), _:
                self.sort_of(ctx, ann)
                annv = self.eval(ctx, ann)
                self.check(ctx, v, annv)
                self.check(ctx.define(x, annv, self.eval(ctx, v)), b, expected)
                return
        actual = self.infer(ctx, t)
        if not self.conv(ctx, actual, expected):
            cls = "UniverseMismatch" if isinstance(actual, VSort) and isinstance(expected, VSort) else "TypeMismatch"
            raise error(cls, self.where(t), "type mismatch",
                        expected=self.show(ctx, expected), actual=self.show(ctx, actual))


def _run(d: Decl, thunk, fallback: Span):
    try:
        return thunk()
    except HTTError as exc:
        raise HTTError(dataclasses.replace(exc.diagnostic, decl=d.name)) from None
    except StepBudgetExceeded as exc:
        raise error("StepBudgetExceeded", fallback, str(exc), decl=d.name) from None
    except RecursionError:
        raise error("StepBudgetExceeded", fallback, "recursion limit reached", decl=d.name) from None


def check_decl(sig: Signature, opts: CheckOptions, d: Decl, budget: Optional[int] = None) -> Signature:
    """Check ``d`` against ``sig`` and return the extended signature."""
    span = d.span or _NOWHERE
    if d.name in sig:
        raise error("DuplicateName", span, f"{d.name!r} is already declared", decl=d.name)
    ck = Checker(sig, opts, d.level_params, budget, span)

    def go():
        ctx = Context()
        ck.sort_of(ctx, d.type)
        if d.body is not None:
            ck.check(ctx, d.body, ck.eval(ctx, d.type))

    _run(d, go, span)
    return sig.extend(d)


def infer(sig: Signature, opts: CheckOptions, ctx: Context, t: Term) -> Value:
    return Checker(sig, opts).infer(ctx, t)


def check(sig: Signature, opts: CheckOptions, ctx: Context, t: Term, expected: Value) -> None:
    Checker(sig, opts).check(ctx, t, expected)


# -- modules -------------------------------------------------------------------

@dataclass
class FileReport:
    path: str
    pragmas: list[str] = field(default_factory=list)
    accepted: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    decls: list[Decl] = field(default_factory=list)
    signature: Optional[Signature] = field(default=None, repr=False)
    seconds: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def check_module(sig: Signature, parsed: ParsedFile, budget: Optional[int] = None) -> FileReport:
    """Check every decl of a parsed file in order, extending ``sig``.

    All decls are attempted; a decl that mentions an earlier decl of the file
    which failed is skipped without a diagnostic of its own.
    """
    start = time.perf_counter()
    opts = CheckOptions.from_pragmas(parsed.pragmas)
    report = FileReport(parsed.path, list(parsed.pragmas))
    scope = sig.arities()
    failed: set[str] = set()
    for sd in parsed.decls:
        try:
            d = resolve_decl(sd, scope)
        except HTTError as exc:
            report.diagnostics.append(dataclasses.replace(exc.diagnostic, decl=sd.name))
            failed.add(sd.name)
            scope.setdefault(sd.name, len(sd.level_params))
            continue
        scope.setdefault(sd.name, len(sd.level_params))
        if d.deps & failed:
            report.skipped.append(d.name)
            failed.add(d.name)
            continue
        try:
            sig = check_decl(sig, opts, d, budget)
        except HTTError as exc:
            report.diagnostics.append(exc.diagnostic)
            failed.add(d.name)
            continue
        report.accepted.append(d.name)
        report.decls.append(d)
    report.signature = sig
    report.seconds = time.perf_counter() - start
    return report


def check_source(sig: Signature, text: str, path: str = "<input>", budget: Optional[int] = None) -> FileReport:
    """Parse and check ``text``; a parse error becomes the report's only diagnostic."""
    try:
        parsed = parse_text(text, path)
    except HTTError as exc:
        return FileReport(path, diagnostics=[exc.diagnostic], signature=sig)
    return check_module(sig, parsed, budget)


# -- built-ins -------------------------------------------------------------------

# Each rule is stated as two bodies for one type: the redex and its contractum.
# Both must check, and they must be convertible.
DELTA_OBLIGATIONS = """
def sigma_elim_rule [l m n] : (A : Set l) -> (B : A -> Set m) -> (C : Sigma {l, m} A B -> Set n)
  -> (c : (x : A) -> (y : B x) -> C (pair {l, m} A B x y)) -> (x : A) -> (y : B x)
  -> C (pair {l, m} A B x y)
  = fun A B C c x y => SigmaElim {l, m, n} A B C c (pair {l, m} A B x y);
def sigma_elim_rhs [l m n] : (A : Set l) -> (B : A -> Set m) -> (C : Sigma {l, m} A B -> Set n)
  -> (c : (x : A) -> (y : B x) -> C (pair {l, m} A B x y)) -> (x : A) -> (y : B x)
  -> C (pair {l, m} A B x y)
  = fun A B C c x y => c x y;
def heq_elim_rule [l m] : (A : Set l) -> (x : A) -> (P : (B : Set l) -> (y : B) -> HEq {l} A B x y -> Set m)
  -> (p : P A x (hrefl {l} A x)) -> P A x (hrefl {l} A x)
  = fun A x P p => HEqElim {l, m} A x P p A x (hrefl {l} A x);
def heq_elim_rhs [l m] : (A : Set l) -> (x : A) -> (P : (B : Set l) -> (y : B) -> HEq {l} A B x y -> Set m)
  -> (p : P A x (hrefl {l} A x)) -> P A x (hrefl {l} A x)
  = fun A x P p => p;
def jp_rule [l m] : (A : Set l) -> (x : A) -> (P : (y : A) -> HEq {l} A A x y -> Set m)
  -> (p : P x (hrefl {l} A x)) -> P x (hrefl {l} A x)
  = fun A x P p => JP {l, m} A x P p x (hrefl {l} A x);
def jp_rhs [l m] : (A : Set l) -> (x : A) -> (P : (y : A) -> HEq {l} A A x y -> Set m)
  -> (p : P x (hrefl {l} A x)) -> P x (hrefl {l} A x)
  = fun A x P p => p;
"""


class BuiltinError(Exception):
    pass


@lru_cache(maxsize=None)
def base_signature() -> Signature:
    """Built-in table, type-checked, with every delta rule validated."""
    sig = Signature()
    for d in core.builtin_table():
        try:
            check_decl(sig, CheckOptions.everything(), d)
        except HTTError as exc:
            raise BuiltinError(f"built-in {d.name} is ill-typed: {exc}") from None
        sig = sig.extend(d)
    verify_delta_rules(sig)
    return sig


def verify_delta_rules(sig: Signature) -> None:
    report = check_source(sig, "#with-K\n" + DELTA_OBLIGATIONS, "<delta-rules>")
    if report.diagnostics:
        raise BuiltinError(f"delta rule ill-typed: {report.diagnostics[0]}")
    ext = report.signature
    ev = Evaluator(ext)
    for lhs, rhs in [("sigma_elim_rule", "sigma_elim_rhs"),
                     ("heq_elim_rule", "heq_elim_rhs"), ("jp_rule", "jp_rhs")]:
        a, b = ext[lhs], ext[rhs]
        if not ev.conv(0, ev.eval(a.type), ev.eval(b.type)):
            raise BuiltinError(f"{lhs}: sides have different types")
        if not ev.conv(0, ev.eval(a.body), ev.eval(b.body)):
            raise BuiltinError(f"{lhs}: redex does not reduce to its contractum")
