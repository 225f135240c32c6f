"""Batch driver: ``htt check``, ``htt corpus`` and ``htt normalize``."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .corpus import (
    SIGMA_FREE_ROOTS, HarnessMismatch, ManifestError, dependency_violations, format_violation,
    load_manifest, verify_corpus,
)
from .diagnostics import HTTError, render_diagnostic
from .nbe import StepBudgetExceeded, budget_from_env, normalize
from .surface import parse_text, show_term
from .typecheck import base_signature, check_module

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_USAGE = 0, 1, 2


@dataclass
class CliConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    name: Optional[str] = None
    json: bool = False
    step_budget: Optional[int] = None
    color: str = "auto"

    def use_color(self, stream: TextIO) -> bool:
        if self.json or self.color == "never":
            return False
        if self.color == "always":
            return True
        return stream.isatty() and "NO_COLOR" not in os.environ


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _natural(s: str) -> int:
    n = int(s)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true",
                        help="one JSON object per diagnostic on stdout")
    common.add_argument("--step-budget", type=_natural, default=None,
                        help="reduction steps allowed per declaration "
                             "(default: $HTT_STEP_BUDGET or 10000000)")
    common.add_argument("--color", choices=("auto", "always", "never"), default="auto")

    p = _Parser(prog="htt", description="Proof checker for typal heterogeneous equality.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("check", parents=[common], help="typecheck files, each extending the last")
    c.add_argument("files", nargs="+")
    k = sub.add_parser("corpus", parents=[common], help="verify a corpus directory with a MANIFEST")
    k.add_argument("dir")
    n = sub.add_parser("normalize", parents=[common],
                       help="print the normal form and type of a declaration")
    n.add_argument("files", nargs="+", help="files to load, in order")
    n.add_argument("name", help="declaration to normalize")
    return p


def parse_args(argv: Sequence[str]) -> CliConfig:
    ns = build_parser().parse_args(list(argv))
    if ns.command == "corpus":
        inputs, name = [ns.dir], None
    elif ns.command == "normalize":
        inputs, name = ns.files, ns.name
    else:
        inputs, name = ns.files, None
    return CliConfig(ns.command, inputs, name, ns.json, ns.step_budget, ns.color)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _load(cfg: CliConfig, out: TextIO, err: TextIO):
    """Check ``cfg.inputs`` in order; returns (signature, diagnostic count)."""
    sig = base_signature()
    count = 0
    color = cfg.use_color(out)
    for path in cfg.inputs:
        text = _read(path)
        try:
            parsed = parse_text(text, path)
        except HTTError as exc:
            diags = [exc.diagnostic]
        else:
            rep = check_module(sig, parsed, cfg.step_budget)
            sig = rep.signature
            diags = rep.diagnostics
        for d in diags:
            print(render_diagnostic(d, "json" if cfg.json else "human", color), file=out)
        count += len(diags)
    return sig, count


def cmd_check(cfg: CliConfig, out: TextIO, err: TextIO) -> int:
    _, count = _load(cfg, out, err)
    if not cfg.json:
        print(f"{len(cfg.inputs)} file(s), {count} diagnostic(s)", file=err)
    return EXIT_DIAGNOSTICS if count else EXIT_OK


def cmd_corpus(cfg: CliConfig, out: TextIO, err: TextIO) -> int:
    root = Path(cfg.inputs[0])
    manifest = load_manifest(root)
    report = verify_corpus(manifest, base_signature(), cfg.step_budget)
    if cfg.json:
        # only diagnostics nobody asked for
        for r in report.files:
            if r.entry.expects_accept:
                for d in r.diagnostics:
                    print(render_diagnostic(d, "json"), file=out)
    else:
        for m in report.mismatches:
            print(f"mismatch: {m}", file=out)
    # a corpus without the usual roots (a scratch directory, say) is not an error
    roots = [r for r in SIGMA_FREE_ROOTS if r in report.graph]
    bad_edges = dependency_violations(report.graph, roots)
    for path in bad_edges:
        print(f"dependency violation: {format_violation(path)}", file=out)
    print(report.summary(), file=err if cfg.json else out)
    if report.mismatches or bad_edges:
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def cmd_normalize(cfg: CliConfig, out: TextIO, err: TextIO) -> int:
    sig, count = _load(cfg, out, err)
    d = sig.get(cfg.name)
    if d is None:
        print(f"htt: no declaration named {cfg.name!r}", file=err)
        return EXIT_DIAGNOSTICS if count else EXIT_USAGE
    names = sig.names()
    params = f" [{' '.join(d.level_params)}]" if d.level_params else ""
    ty = normalize(sig, d.type, budget=cfg.step_budget)
    print(f"{d.name}{params} : {show_term(ty, (), names)}", file=out)
    if d.body is not None:
        nf = normalize(sig, d.body, budget=cfg.step_budget)
        print(f"  = {show_term(nf, (), names)}", file=out)
    else:
        print(f"  ({d.kind})", file=out)
    return EXIT_DIAGNOSTICS if count else EXIT_OK


COMMANDS = {"check": cmd_check, "corpus": cmd_corpus, "normalize": cmd_normalize}


def run(argv: Sequence[str], out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if cfg.step_budget is None:
        try:
            cfg.step_budget = budget_from_env()
        except ValueError:
            print("htt: HTT_STEP_BUDGET must be an integer", file=err)
            return EXIT_USAGE
    try:
        return COMMANDS[cfg.command](cfg, out, err)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"htt: {exc}", file=err)
        return EXIT_USAGE
    except (ManifestError, HarnessMismatch) as exc:
        print(f"htt: {exc}", file=err)
        return EXIT_USAGE
    except StepBudgetExceeded as exc:
        print(f"htt: {exc}", file=err)
        return EXIT_DIAGNOSTICS


def main(argv: Optional[Sequence[str]] = None) -> int:
    # deeply nested corpus terms recurse through eval/quote
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
