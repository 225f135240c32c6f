"""Corpus manifest, the verification harness and the dependency-graph checks."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .core import App, Const, Decl, Lam, Let, Pi, Signature, Term
from .diagnostics import Diagnostic, HTTError
from .surface import parse_file
from .typecheck import FileReport, base_signature, check_module

CORPUS_DIR = Path(__file__).resolve().parents[2] / "corpus"

# Results that must not rely on the extra Sigma equations.
SIGMA_FREE_ROOTS = (
    "coe", "coeIsRegular", "uip", "axiomK", "axiomKComp",
    "EqElim", "EqComp", "HEqElimDerived", "HEqCompDerived",
)
SIGMA_EQUATIONS = ("fpr", "spr", "eta")

# Postulated side -> model side. Builtins stand in for HEQ, SIG and pairing.
MODEL_RENAMING = {
    "HEQ": "HEq", "SIG": "Sigma", "pairing": "pair",
    "EQ": "model_EQ", "rfl": "model_rfl", "fst": "model_fst", "snd": "model_snd",
    "ctr": "model_ctr", "eqt": "model_eqt", "tpt": "model_tpt",
    "fpr": "model_fpr", "spr": "model_spr", "eta": "model_eta",
}
AXIOMS = ("EQ", "rfl", "ctr", "eqt", "tpt", "fst", "snd", "fpr", "spr", "eta")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    pragmas: tuple[str, ...]
    outcome: str              # "accept" or a diagnostic class
    base: str = "chain"       # "chain" or "fresh"
    names: tuple[str, ...] = ()

    @property
    def expects_accept(self) -> bool:
        return self.outcome == "accept"


@dataclass
class CorpusManifest:
    root: Path
    entries: list[ManifestEntry] = field(default_factory=list)

    def positives(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.expects_accept]

    def negatives(self) -> list[ManifestEntry]:
        return [e for e in self.entries if not e.expects_accept]

    def entry(self, path: str) -> ManifestEntry:
        for e in self.entries:
            if e.path == path or Path(e.path).name == path:
                return e
        raise KeyError(path)


class ManifestError(ValueError):
    pass


def _csv(field_: str) -> tuple[str, ...]:
    return () if field_ == "-" else tuple(x for x in field_.split(",") if x)


def parse_manifest(text: str, root: Path) -> CorpusManifest:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split()
        if len(cols) != 5:
            raise ManifestError(f"MANIFEST:{lineno}: expected 5 columns, got {len(cols)}")
        path, pragmas, outcome, base, names = cols
        if outcome != "accept":
            if not outcome.startswith("reject:"):
                raise ManifestError(f"MANIFEST:{lineno}: bad outcome {outcome!r}")
            outcome = outcome.split(":", 1)[1]
        if base not in ("chain", "fresh"):
            raise ManifestError(f"MANIFEST:{lineno}: bad base {base!r}")
        entries.append(ManifestEntry(path, _csv(pragmas), outcome, base, _csv(names)))
    return CorpusManifest(root, entries)


def load_manifest(root: Path | str) -> CorpusManifest:
    root = Path(root)
    return parse_manifest((root / "MANIFEST").read_text(encoding="utf-8"), root)


def corpus_files(root: Path | str = CORPUS_DIR) -> CorpusManifest:
    return load_manifest(root)


# -- verification ---------------------------------------------------------------

@dataclass(frozen=True)
class HarnessMismatch(Exception):
    path: str
    reason: str

    def __str__(self):
        return f"{self.path}: {self.reason}"


@dataclass
class FileResult:
    entry: ManifestEntry
    report: FileReport
    start: Optional[Signature] = field(default=None, repr=False)  # what the file was checked against

    @property
    def accepted(self) -> list[str]:
        return self.report.accepted

    @property
    def diagnostics(self) -> list[Diagnostic]:
        return self.report.diagnostics

    @property
    def seconds(self) -> float:
        return self.report.seconds


@dataclass
class VerificationReport:
    files: list[FileResult] = field(default_factory=list)
    mismatches: list[HarnessMismatch] = field(default_factory=list)
    # decl name -> direct dependencies; decls of fresh files are keyed "file:name"
    graph: dict[str, frozenset[str]] = field(default_factory=dict)
    chain: Optional[Signature] = field(default=None, repr=False)
    seconds: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def result(self, path: str) -> FileResult:
        for r in self.files:
            if r.entry.path == path or Path(r.entry.path).name == path:
                return r
        raise KeyError(path)

    def counts(self) -> tuple[int, int, int, int]:
        """(positives passing, positives, negatives passing, negatives)."""
        bad = {m.path for m in self.mismatches}
        pos = [r for r in self.files if r.entry.expects_accept]
        neg = [r for r in self.files if not r.entry.expects_accept]
        return (sum(r.entry.path not in bad for r in pos), len(pos),
                sum(r.entry.path not in bad for r in neg), len(neg))

    def summary(self) -> str:
        pa, pn, na, nn = self.counts()
        return f"positive: {pa}/{pn} accepted, negative: {na}/{nn} rejected as expected"


def _judge(entry: ManifestEntry, rep: FileReport) -> Optional[str]:
    if tuple(rep.pragmas) != entry.pragmas and not (
        rep.diagnostics and rep.diagnostics[0].cls == "ParseError"
    ):
        return f"pragmas {list(rep.pragmas)} differ from manifest {list(entry.pragmas)}"
    if entry.expects_accept:
        if rep.diagnostics:
            d = rep.diagnostics[0]
            return f"expected accept, got {d.cls} at {d.span}: {d.message}"
        if tuple(rep.accepted) != entry.names:
            return f"accepted {rep.accepted}, manifest lists {list(entry.names)}"
        return None
    if not rep.diagnostics:
        return f"expected {entry.outcome}, file was accepted"
    if len(rep.diagnostics) != 1:
        return f"expected one diagnostic, got {len(rep.diagnostics)}"
    d = rep.diagnostics[0]
    if d.cls != entry.outcome:
        return f"expected {entry.outcome}, got {d.cls}: {d.message}"
    if entry.names and d.decl not in entry.names:
        return f"diagnostic blames {d.decl!r}, manifest expects {entry.names[0]!r}"
    return None


def verify_corpus(manifest: CorpusManifest, base: Optional[Signature] = None,
                  budget: Optional[int] = None, strict: bool = False) -> VerificationReport:
    """Check every manifest entry in order.

    Accepting chain entries extend one shared signature; fresh entries start
    from ``base``; expected rejections are checked against the chain built so
    far and never extend it.  With ``strict`` the first mismatch is raised.
    """
    start = time.perf_counter()
    base = base if base is not None else base_signature()
    chain = base
    report = VerificationReport()
    for entry in manifest.entries:
        path = manifest.root / entry.path
        start_sig = base if entry.base == "fresh" else chain
        try:
            parsed = parse_file(path)
        except HTTError as exc:
            rep = FileReport(entry.path, diagnostics=[exc.diagnostic], signature=start_sig)
        except OSError as exc:
            raise HarnessMismatch(entry.path, f"cannot read: {exc}") from None
        else:
            parsed.path = entry.path
            rep = check_module(start_sig, parsed, budget)
        report.files.append(FileResult(entry, rep, start_sig))
        reason = _judge(entry, rep)
        if reason is not None:
            mismatch = HarnessMismatch(entry.path, reason)
            if strict:
                raise mismatch
            report.mismatches.append(mismatch)
        if entry.expects_accept:
            local = set(rep.accepted)
            tag = Path(entry.path).name
            for d in rep.decls:
                if entry.base == "fresh":
                    report.graph[f"{tag}:{d.name}"] = frozenset(
                        f"{tag}:{n}" if n in local else n for n in d.deps
                    )
                else:
                    report.graph[d.name] = d.deps
            if entry.base == "chain":
                chain = rep.signature
    report.chain = chain
    report.seconds = time.perf_counter() - start
    return report


# -- dependency claims -------------------------------------------------------------

def closure(graph: Mapping[str, Iterable[str]], root: str) -> set[str]:
    seen: set[str] = set()
    todo = list(graph.get(root, ()))
    while todo:
        n = todo.pop()
        if n not in seen:
            seen.add(n)
            todo.extend(graph.get(n, ()))
    return seen


def path_to(graph: Mapping[str, Iterable[str]], root: str, target: str) -> Optional[list[str]]:
    """A dependency path root -> ... -> target, if one exists."""
    prev: dict[str, str] = {}
    todo = [root]
    seen = {root}
    while todo:
        n = todo.pop(0)
        for m in sorted(graph.get(n, ())):
            if m in seen:
                continue
            seen.add(m)
            prev[m] = n
            if m == target:
                out = [m]
                while out[-1] != root:
                    out.append(prev[out[-1]])
                return out[::-1]
            todo.append(m)
    return None


def dependency_violations(graph: Mapping[str, Iterable[str]],
                          roots: Iterable[str] = SIGMA_FREE_ROOTS,
                          forbidden: Iterable[str] = SIGMA_EQUATIONS) -> list[tuple[str, ...]]:
    """Dependency paths from a root to a forbidden name; empty when the claim holds."""
    out = []
    for root in roots:
        if root not in graph:
            raise KeyError(f"{root} is not in the dependency graph")
        for bad in forbidden:
            p = path_to(graph, root, bad)
            if p is not None:
                out.append(tuple(p))
    return out


def dependency_check(report: VerificationReport, roots: Iterable[str] = SIGMA_FREE_ROOTS,
                     forbidden: Iterable[str] = SIGMA_EQUATIONS) -> bool:
    return not dependency_violations(report.graph, roots, forbidden)


def format_violation(path: tuple[str, ...]) -> str:
    return "->".join(path)


# -- model side ---------------------------------------------------------------------

def rename_constants(t: Term, mapping: Mapping[str, str]) -> Term:
    match t:
        case Const(name, levels):
            return Const(mapping.get(name, name), levels, t.span)
        case Pi(name, dom, cod):
            return Pi(name, rename_constants(dom, mapping), rename_constants(cod, mapping), t.span)
        case Lam(name, body):
            return Lam(name, rename_constants(body, mapping), t.span)
        case App(fn, arg):
            return App(rename_constants(fn, mapping), rename_constants(arg, mapping), t.span)
        case Let(name, ann, bound, body):
            return Let(name, *(rename_constants(x, mapping) for x in (ann, bound, body)), t.span)
        case _:
            return t


def model_mismatches(sig: Signature, axioms: Iterable[str] = AXIOMS,
                     renaming: Mapping[str, str] = MODEL_RENAMING) -> list[str]:
    """Axioms whose model inhabitant's type is not the renamed axiom type."""
    bad = []
    for name in axioms:
        ax: Decl = sig[name]
        model: Decl = sig[renaming[name]]
        if (ax.level_params != model.level_params
                or rename_constants(ax.type, renaming) != model.type):
            bad.append(name)
    return bad
