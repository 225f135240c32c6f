"""Normalisation by evaluation, delta rules and definitional equality.

Definitions unfold eagerly, so the only heads a stuck value can have are
bound variables, postulates and built-ins.  A built-in eliminator fires as
soon as its spine reaches full arity with a constructor in the scrutinee
position; otherwise it stays stuck for good, since values never change.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .core import (
    DEF, DELTA_RULES, App, Const, Lam, Let, Pi, Signature, Sort, Term, Var,
)
from .level import LevelExpr, LevelNF, LMax, LSuc, LVar, LZero

DEFAULT_STEP_BUDGET = 10_000_000


class StepBudgetExceeded(Exception):
    pass


class IllFormedApplication(Exception):
    pass


LevelEnv = Optional[Mapping[str, LevelNF]]


@dataclass(frozen=True)
class Closure:
    env: tuple["Value", ...]
    lenv: LevelEnv
    body: Term


@dataclass(frozen=True)
class VSort:
    level: LevelNF


@dataclass(frozen=True)
class VPi:
    name: str
    dom: "Value"
    cod: Closure


@dataclass(frozen=True)
class VLam:
    name: str
    body: Closure


@dataclass(frozen=True)
class HVar:
    level: int  # de Bruijn level


@dataclass(frozen=True)
class HConst:
    name: str
    levels: tuple[LevelNF, ...]


@dataclass(frozen=True)
class VStuck:
    head: Union[HVar, HConst]
    spine: tuple["Value", ...] = ()


Value = Union[VSort, VPi, VLam, VStuck]


def fresh(depth: int) -> VStuck:
    return VStuck(HVar(depth))


def eval_level(e: LevelExpr, lenv: LevelEnv) -> LevelNF:
    match e:
        case LZero():
            return LevelNF(0)
        case LVar(name):
            if lenv is not None and name in lenv:
                return lenv[name]
            return LevelNF.var(name)
        case LSuc(a):
            return eval_level(a, lenv).suc()
        case LMax(a, b):
            return eval_level(a, lenv).max(eval_level(b, lenv))
    raise TypeError(f"not a level expression: {e!r}")


def budget_from_env() -> int:
    raw = os.environ.get("HTT_STEP_BUDGET")
    return int(raw) if raw else DEFAULT_STEP_BUDGET


class Evaluator:
    """Evaluation, read-back and conversion against one signature."""

    def __init__(self, sig: Signature, budget: Optional[int] = None):
        self.sig = sig
        self.budget = budget_from_env() if budget is None else budget
        self.steps = 0

    def reset(self) -> None:
        self.steps = 0

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceeded(f"exceeded {self.budget} reduction steps")

    # -- evaluation --------------------------------------------------------

    def eval(self, t: Term, env: tuple[Value, ...] = (), lenv: LevelEnv = None) -> Value:
        self._tick()
        match t:
            case Var(i):
                return env[len(env) - 1 - i]
            case Sort(level):
                return VSort(eval_level(level, lenv))
            case Pi(x, a, b):
                return VPi(x, self.eval(a, env, lenv), Closure(env, lenv, b))
            case Lam(x, b):
                return VLam(x, Closure(env, lenv, b))
            case App(f, a):
                return self.apply(self.eval(f, env, lenv), self.eval(a, env, lenv))
            case Let(_, _, v, b):
                return self.eval(b, env + (self.eval(v, env, lenv),), lenv)
            case Const(name, levels):
                nfs = tuple(eval_level(lv, lenv) for lv in levels)
                return self.const(name, nfs)
        raise TypeError(f"not a term: {t!r}")

    def const(self, name: str, levels: tuple[LevelNF, ...]) -> Value:
        d = self.sig[name]
        if d.kind == DEF:
            return self.eval(d.body, (), dict(zip(d.level_params, levels)))
        return VStuck(HConst(name, levels))

    def instantiate(self, c: Closure, v: Value) -> Value:
        return self.eval(c.body, c.env + (v,), c.lenv)

    def apply(self, fn: Value, arg: Value) -> Value:
        self._tick()
        match fn:
            case VLam(_, body):
                return self.instantiate(body, arg)
            case VStuck(head, sp):
                return self.delta(VStuck(head, sp + (arg,)))
        raise IllFormedApplication(f"cannot apply {type(fn).__name__}")

    def apply_all(self, fn: Value, *args: Value) -> Value:
        for a in args:
            fn = self.apply(fn, a)
        return fn

    def delta(self, v: VStuck) -> Value:
        if not isinstance(v.head, HConst) or v.head.name not in DELTA_RULES:
            return v
        _, arity, pos, ctor = DELTA_RULES[v.head.name]
        if len(v.spine) != arity:
            return v
        scrut = v.spine[pos]
        if not (isinstance(scrut, VStuck) and isinstance(scrut.head, HConst)
                and scrut.head.name == ctor and len(scrut.spine) == 2 + 2 * (ctor == "pair")):
            return v
        if ctor == "pair":
            # SigmaElim A B C c (pair A' B' x y) ~> c x y
            x, y = scrut.spine[2], scrut.spine[3]
            return self.apply_all(v.spine[3], x, y)
        # HEqElim/JP ... p ... (hrefl A x) ~> p
        return v.spine[3]

    # -- read-back ---------------------------------------------------------

    def quote(self, depth: int, v: Value) -> Term:
        self._tick()
        match v:
            case VSort(nf):
                return Sort(nf.to_expr())
            case VPi(x, a, b):
                return Pi(x, self.quote(depth, a),
                          self.quote(depth + 1, self.instantiate(b, fresh(depth))))
            case VLam(x, b):
                return Lam(x, self.quote(depth + 1, self.instantiate(b, fresh(depth))))
            case VStuck(head, sp):
                if isinstance(head, HVar):
                    t: Term = Var(depth - 1 - head.level)
                else:
                    t = Const(head.name, tuple(nf.to_expr() for nf in head.levels))
                for a in sp:
                    t = App(t, self.quote(depth, a))
                return t
        raise TypeError(f"not a value: {v!r}")

    # -- conversion --------------------------------------------------------

    def conv(self, depth: int, a: Value, b: Value) -> bool:
        self._tick()
        match a, b:
            case VSort(x), VSort(y):
                return x == y
            case VPi(_, a1, b1), VPi(_, a2, b2):
                v = fresh(depth)
                return (self.conv(depth, a1, a2)
                        and self.conv(depth + 1, self.instantiate(b1, v), self.instantiate(b2, v)))
            case VLam(_, b1), VLam(_, b2):
                v = fresh(depth)
                return self.conv(depth + 1, self.instantiate(b1, v), self.instantiate(b2, v))
            case VLam(_, b1), VStuck():
                v = fresh(depth)
                return self.conv(depth + 1, self.instantiate(b1, v), self.apply(b, v))
            case VStuck(), VLam(_, b2):
                v = fresh(depth)
                return self.conv(depth + 1, self.apply(a, v), self.instantiate(b2, v))
            case VStuck(h1, s1), VStuck(h2, s2):
                return (h1 == h2 and len(s1) == len(s2)
                        and all(self.conv(depth, x, y) for x, y in zip(s1, s2)))
        return False


# module-level entry points ------------------------------------------------

def evaluate(sig: Signature, env: tuple[Value, ...], t: Term, lenv: LevelEnv = None) -> Value:
    return Evaluator(sig).eval(t, tuple(env), lenv)


def apply(sig: Signature, fn: Value, arg: Value) -> Value:
    return Evaluator(sig).apply(fn, arg)


def quote(depth: int, v: Value, sig: Optional[Signature] = None) -> Term:
    return Evaluator(sig if sig is not None else Signature()).quote(depth, v)


def convert(sig: Signature, depth: int, a: Value, b: Value, budget: Optional[int] = None) -> bool:
    return Evaluator(sig, budget).conv(depth, a, b)


def normalize(sig: Signature, t: Term, env: tuple[Value, ...] = (), lenv: LevelEnv = None,
              budget: Optional[int] = None) -> Term:
    ev = Evaluator(sig, budget)
    return ev.quote(len(env), ev.eval(t, tuple(env), lenv))
