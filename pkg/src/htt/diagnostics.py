"""Source spans, structured diagnostics and their renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

CLASSES = (
    "TypeMismatch",
    "UnboundName",
    "UnboundLevelVar",
    "LevelArityMismatch",
    "UniverseMismatch",
    "KDisabled",
    "BuiltinDisabled",
    "NotAFunction",
    "StepBudgetExceeded",
    "ParseError",
    "DuplicateName",
)


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"

    def to(self, other: "Span") -> "Span":
        return Span(self.file, self.line, self.col, other.end_line, other.end_col)


@dataclass(frozen=True)
class Diagnostic:
    cls: str
    span: Span
    message: str
    expected: Optional[str] = None
    actual: Optional[str] = None
    decl: Optional[str] = None

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ValueError(f"unknown diagnostic class {self.cls!r}")

    def as_record(self) -> dict:
        return {
            "file": self.span.file,
            "line": self.span.line,
            "col": self.span.col,
            "class": self.cls,
            "message": self.message,
            "expected": self.expected,
            "actual": self.actual,
        }


class HTTError(Exception):
    """Raised inside the parser/checker; carries exactly one diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(f"{diagnostic.cls}: {diagnostic.message}")
        self.diagnostic = diagnostic


def error(cls: str, span: Span, message: str, **kw) -> HTTError:
    return HTTError(Diagnostic(cls, span, message, **kw))


_RED, _BOLD, _RESET = "\x1b[31m", "\x1b[1m", "\x1b[0m"


def render_diagnostic(d: Diagnostic, mode: str = "human", color: bool = False) -> str:
    if mode == "json":
        return json.dumps(d.as_record(), ensure_ascii=False, sort_keys=False)
    cls = f"{_BOLD}{_RED}{d.cls}{_RESET}" if color else d.cls
    msg = d.message if d.decl is None else f"{d.message} [in {d.decl}]"
    lines = [f"{d.span}: {cls}: {msg}"]
    if d.expected is not None:
        lines.append(f"  expected: {d.expected}")
    if d.actual is not None:
        lines.append(f"  actual:   {d.actual}")
    return "\n".join(lines)
