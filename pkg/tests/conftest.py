import sys
from pathlib import Path

import pytest

from htt.corpus import CORPUS_DIR, corpus_files, verify_corpus
from htt.typecheck import base_signature

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def base():
    return base_signature()


@pytest.fixture(scope="session")
def manifest():
    return corpus_files(CORPUS_DIR)


@pytest.fixture(scope="session")
def report(manifest, base):
    return verify_corpus(manifest, base)


@pytest.fixture(scope="session")
def chain(report):
    return report.chain


@pytest.fixture(scope="session")
def corpus_decls(report):
    """(file, decl, signature the decl lives in) for every accepted corpus decl."""
    out = []
    for r in report.files:
        if r.entry.expects_accept:
            for d in r.report.decls:
                out.append((r.entry.path, d, r.report.signature))
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
