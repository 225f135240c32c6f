"""Core syntax (de Bruijn indices), declarations and the global signature."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Optional, Union

from .diagnostics import Span
from .level import LevelExpr


@dataclass(frozen=True)
class Var:
    index: int
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Sort:
    level: LevelExpr
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Pi:
    name: str = field(compare=False)
    dom: "Term"
    cod: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lam:
    name: str = field(compare=False)
    body: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    name: str
    levels: tuple[LevelExpr, ...] = ()
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Let:
    name: str = field(compare=False)
    ann: "Term"
    bound: "Term"
    body: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


Term = Union[Var, Sort, Pi, Lam, App, Const, Let]


def apps(fn: Term, *args: Term) -> Term:
    for a in args:
        fn = App(fn, a)
    return fn


def spine(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    return t, args[::-1]


def constants(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        match stack.pop():
            case Const(name):
                out.add(name)
            case Pi(_, a, b) | App(a, b):
                stack += (a, b)
            case Lam(_, b):
                stack.append(b)
            case Let(_, a, b, c):
                stack += (a, b, c)
    return out


def term_size(t: Term) -> int:
    match t:
        case Pi(_, a, b) | App(a, b):
            return 1 + term_size(a) + term_size(b)
        case Lam(_, b):
            return 1 + term_size(b)
        case Let(_, a, b, c):
            return 1 + term_size(a) + term_size(b) + term_size(c)
    return 1


# -- parallel de Bruijn substitutions --------------------------------------
#
# A substitution maps every index to a term.  ``lift`` pushes one under a
# binder; composition satisfies subst(compose(s2, s1), t) == subst(s2, subst(s1, t)).

Subst = Callable[[int], Term]


def ids(i: int) -> Term:
    return Var(i)


def shift_by(k: int) -> Subst:
    return lambda i: Var(i + k)


def cons(t: Term, s: Subst) -> Subst:
    return lambda i: t if i == 0 else s(i - 1)


def single(t: Term) -> Subst:
    return cons(t, ids)


def lift(s: Subst) -> Subst:
    return lambda i: Var(0) if i == 0 else term_shift_subst(s(i - 1), shift_by(1))


def compose(s2: Subst, s1: Subst) -> Subst:
    return lambda i: term_shift_subst(s1(i), s2)


def term_shift_subst(t: Term, s: Subst) -> Term:
    match t:
        case Var(i):
            return s(i)
        case Sort() | Const():
            return t
        case Pi(x, a, b):
            return Pi(x, term_shift_subst(a, s), term_shift_subst(b, lift(s)), t.span)
        case Lam(x, b):
            return Lam(x, term_shift_subst(b, lift(s)), t.span)
        case App(f, a):
            return App(term_shift_subst(f, s), term_shift_subst(a, s), t.span)
        case Let(x, a, v, b):
            return Let(
                x,
                term_shift_subst(a, s),
                term_shift_subst(v, s),
                term_shift_subst(b, lift(s)),
                t.span,
            )
    raise TypeError(f"not a term: {t!r}")


def free_vars(t: Term, depth: int = 0) -> set[int]:
    """Indices free in ``t``, counted from outside ``depth`` binders."""
    match t:
        case Var(i):
            return {i - depth} if i >= depth else set()
        case Pi(_, a, b):
            return free_vars(a, depth) | free_vars(b, depth + 1)
        case Lam(_, b):
            return free_vars(b, depth + 1)
        case App(f, a):
            return free_vars(f, depth) | free_vars(a, depth)
        case Let(_, a, v, b):
            return free_vars(a, depth) | free_vars(v, depth) | free_vars(b, depth + 1)
    return set()


# -- declarations ----------------------------------------------------------

POSTULATE, DEF, BUILTIN = "postulate", "def", "builtin"


@dataclass(frozen=True)
class Decl:
    name: str
    level_params: tuple[str, ...]
    kind: str
    type: Term
    body: Optional[Term] = None
    delta: Optional[str] = None
    span: Optional[Span] = field(default=None, compare=False, repr=False)

    @property
    def deps(self) -> frozenset[str]:
        names = constants(self.type)
        if self.body is not None:
            names |= constants(self.body)
        return frozenset(names)


SIGMA_BUILTINS = frozenset({"Sigma", "pair", "SigmaElim"})
HEQ_BUILTINS = frozenset({"HEq", "hrefl", "HEqElim", "JP"})
K_BUILTINS = frozenset({"JP"})

BUILTIN_SOURCE = """
postulate Sigma [l m] : (A : Set l) -> (A -> Set m) -> Set (lmax l m);
postulate pair [l m] : (A : Set l) -> (B : A -> Set m) -> (x : A) -> B x -> Sigma {l, m} A B;
postulate SigmaElim [l m n] : (A : Set l) -> (B : A -> Set m)
  -> (C : Sigma {l, m} A B -> Set n)
  -> ((x : A) -> (y : B x) -> C (pair {l, m} A B x y))
  -> (z : Sigma {l, m} A B) -> C z;
postulate HEq [l] : (A : Set l) -> (B : Set l) -> A -> B -> Set l;
postulate hrefl [l] : (A : Set l) -> (x : A) -> HEq {l} A A x x;
postulate HEqElim [l m] : (A : Set l) -> (x : A)
  -> (P : (B : Set l) -> (y : B) -> HEq {l} A B x y -> Set m)
  -> P A x (hrefl {l} A x)
  -> (B : Set l) -> (y : B) -> (e : HEq {l} A B x y) -> P B y e;
postulate JP [l m] : (A : Set l) -> (x : A)
  -> (P : (y : A) -> HEq {l} A A x y -> Set m)
  -> P x (hrefl {l} A x)
  -> (y : A) -> (e : HEq {l} A A x y) -> P y e;
"""

# name -> (delta tag, value arity, scrutinee position, constructor)
DELTA_RULES = {
    "SigmaElim": ("sigma_elim", 5, 4, "pair"),
    "HEqElim": ("heq_elim", 7, 6, "hrefl"),
    "JP": ("jp", 6, 5, "hrefl"),
}


@lru_cache(maxsize=None)
def builtin_table() -> tuple[Decl, ...]:
    from .surface import parse_text, resolve

    parsed = parse_text(BUILTIN_SOURCE, "<builtins>")
    out = []
    for d in resolve(parsed.decls, {}):
        rule = DELTA_RULES.get(d.name)
        out.append(
            Decl(d.name, d.level_params, BUILTIN, d.type,
                 delta=rule[0] if rule else None, span=d.span)
        )
    return tuple(out)


class Signature:
    """Append-only, ordered map from names to declarations."""

    def __init__(self, decls: Iterable[Decl] = ()):
        self._decls: dict[str, Decl] = {}
        self._closure: dict[str, frozenset[str]] = {}
        for d in decls:
            self._add(d)

    def _add(self, d: Decl) -> None:
        if d.name in self._decls:
            raise ValueError(f"duplicate declaration {d.name!r}")
        missing = d.deps - self._decls.keys()
        if missing:
            raise ValueError(f"{d.name} refers to undeclared {sorted(missing)}")
        self._decls[d.name] = d

    def extend(self, d: Decl) -> "Signature":
        new = Signature.__new__(Signature)
        new._decls = dict(self._decls)
        new._closure = dict(self._closure)
        new._add(d)
        return new

    def __contains__(self, name: str) -> bool:
        return name in self._decls

    def __getitem__(self, name: str) -> Decl:
        return self._decls[name]

    def get(self, name: str) -> Optional[Decl]:
        return self._decls.get(name)

    def __iter__(self):
        return iter(self._decls.values())

    def __len__(self):
        return len(self._decls)

    def names(self) -> list[str]:
        return list(self._decls)

    def arities(self) -> dict[str, int]:
        return {n: len(d.level_params) for n, d in self._decls.items()}

    def closure(self, name: str) -> frozenset[str]:
        """All names ``name`` depends on, transitively (excluding itself)."""
        if name in self._closure:
            return self._closure[name]
        out: set[str] = set()
        for dep in self._decls[name].deps:
            if dep != name:
                out.add(dep)
                out |= self.closure(dep)
        result = frozenset(out)
        self._closure[name] = result
        return result
