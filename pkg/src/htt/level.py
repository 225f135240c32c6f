"""Universe levels: the free (max, +1, 0) algebra over level variables.

A level expression is normalised to ``LevelNF``: a constant part plus, for
each variable that occurs, the largest successor offset applied to it.  The
constant is kept at least as large as every offset (a variable is never
smaller than zero), which makes the form canonical, so level equality is
structural equality of normal forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union


class UnboundLevelVar(Exception):
    def __init__(self, name: str):
        super().__init__(f"unbound level variable {name!r}")
        self.name = name


@dataclass(frozen=True)
class LZero:
    pass


@dataclass(frozen=True)
class LSuc:
    arg: "LevelExpr"


@dataclass(frozen=True)
class LMax:
    left: "LevelExpr"
    right: "LevelExpr"


@dataclass(frozen=True)
class LVar:
    name: str


LevelExpr = Union[LZero, LSuc, LMax, LVar]


@dataclass(frozen=True)
class LevelNF:
    base: int = 0
    atoms: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        # canonicalise in place so every construction path agrees
        merged: dict[str, int] = {}
        for name, off in self.atoms:
            merged[name] = max(off, merged.get(name, 0))
        atoms = tuple(sorted(merged.items()))
        base = max([self.base, *merged.values()])
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "base", base)

    @classmethod
    def const(cls, n: int) -> "LevelNF":
        return cls(n)

    @classmethod
    def var(cls, name: str) -> "LevelNF":
        return cls(0, ((name, 0),))

    def suc(self, k: int = 1) -> "LevelNF":
        return LevelNF(self.base + k, tuple((x, o + k) for x, o in self.atoms))

    def max(self, other: "LevelNF") -> "LevelNF":
        return LevelNF(max(self.base, other.base), self.atoms + other.atoms)

    def variables(self) -> frozenset[str]:
        return frozenset(x for x, _ in self.atoms)

    def evaluate(self, valuation: Mapping[str, int]) -> int:
        return max([self.base, *(valuation[x] + o for x, o in self.atoms)])

    def subst(self, mapping: Mapping[str, "LevelNF"]) -> "LevelNF":
        """Substitute normal forms for variables; unmapped variables stay put."""
        out = LevelNF(self.base)
        for x, o in self.atoms:
            target = mapping.get(x)
            out = out.max(LevelNF(0, ((x, o),)) if target is None else target.suc(o))
        return out

    def to_expr(self) -> LevelExpr:
        parts: list[LevelExpr] = []
        top = max((o for _, o in self.atoms), default=-1)
        if self.base > top:
            parts.append(_iterate_suc(LZero(), self.base))
        for x, o in self.atoms:
            parts.append(_iterate_suc(LVar(x), o))
        expr = parts[0]
        for p in parts[1:]:
            expr = LMax(expr, p)
        return expr


def _iterate_suc(e: LevelExpr, k: int) -> LevelExpr:
    for _ in range(k):
        e = LSuc(e)
    return e


def level_normalize(e: LevelExpr) -> LevelNF:
    match e:
        case LZero():
            return LevelNF(0)
        case LVar(name):
            return LevelNF.var(name)
        case LSuc(arg):
            return level_normalize(arg).suc()
        case LMax(a, b):
            return level_normalize(a).max(level_normalize(b))
    raise TypeError(f"not a level expression: {e!r}")


def level_eq(a: LevelExpr, b: LevelExpr) -> bool:
    return level_normalize(a) == level_normalize(b)


def level_vars(e: LevelExpr) -> frozenset[str]:
    match e:
        case LVar(name):
            return frozenset([name])
        case LSuc(arg):
            return level_vars(arg)
        case LMax(a, b):
            return level_vars(a) | level_vars(b)
    return frozenset()


def level_instantiate(e: LevelExpr, subst: Mapping[str, LevelExpr]) -> LevelExpr:
    match e:
        case LZero():
            return e
        case LVar(name):
            if name not in subst:
                raise UnboundLevelVar(name)
            return subst[name]
        case LSuc(arg):
            return LSuc(level_instantiate(arg, subst))
        case LMax(a, b):
            return LMax(level_instantiate(a, subst), level_instantiate(b, subst))
    raise TypeError(f"not a level expression: {e!r}")


def level_eval(e: LevelExpr, valuation: Mapping[str, int]) -> int:
    """Direct evaluation of an expression at a valuation of its variables."""
    match e:
        case LZero():
            return 0
        case LVar(name):
            return valuation[name]
        case LSuc(arg):
            return level_eval(arg, valuation) + 1
        case LMax(a, b):
            return max(level_eval(a, valuation), level_eval(b, valuation))
    raise TypeError(f"not a level expression: {e!r}")


def level_depth(e: LevelExpr) -> int:
    match e:
        case LSuc(arg):
            return 1 + level_depth(arg)
        case LMax(a, b):
            return 1 + max(level_depth(a), level_depth(b))
    return 0


def show_level(e: LevelExpr, atomic: bool = False) -> str:
    """Surface text for a level; ``atomic`` wraps compound forms in parens."""
    n = _as_numeral(e)
    if n is not None:
        return str(n)
    match e:
        case LVar(name):
            return name
        case LSuc(arg):
            s = f"lsuc {show_level(arg, True)}"
        case LMax(a, b):
            s = f"lmax {show_level(a, True)} {show_level(b, True)}"
        case _:
            raise TypeError(f"not a level expression: {e!r}")
    return f"({s})" if atomic else s


def _as_numeral(e: LevelExpr) -> int | None:
    n = 0
    while isinstance(e, LSuc):
        e, n = e.arg, n + 1
    return n if isinstance(e, LZero) else None
