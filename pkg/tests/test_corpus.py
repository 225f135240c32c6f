import shutil

import pytest

from htt.corpus import (
    AXIOMS, MODEL_RENAMING, SIGMA_FREE_ROOTS, CorpusManifest, HarnessMismatch, ManifestEntry,
    ManifestError, closure, dependency_check, dependency_violations, load_manifest,
    model_mismatches, parse_manifest, verify_corpus,
)
from htt.surface import parse_file, resolve
from htt.typecheck import check_module, check_source

COMPUTATION_WITNESSES = ("EqComp", "HEqCompDerived", "SigCompDerived", "axiomKComp")


def test_manifest_shape(manifest):
    pos, neg = manifest.positives(), manifest.negatives()
    assert len(pos) == 9 and len(neg) >= 10
    assert "coe" in pos[2].names
    assert manifest.entry("model_tpt.htt").pragmas == ("with-K",)
    assert manifest.entry("model_nok.htt").pragmas == ()
    assert manifest.entry("eqt_wrong_level.htt").outcome == "UniverseMismatch"
    for e in manifest.entries:
        assert (manifest.root / e.path).is_file()


def test_manifest_rejects_garbage(tmp_path):
    with pytest.raises(ManifestError):
        parse_manifest("a.htt - maybe chain x\n", tmp_path)
    with pytest.raises(ManifestError):
        parse_manifest("a.htt - accept\n", tmp_path)


def test_positive_corpus_is_clean(report):
    assert report.ok, [str(m) for m in report.mismatches]
    for r in report.files:
        if r.entry.expects_accept:
            assert r.diagnostics == [] and tuple(r.accepted) == r.entry.names


def test_negative_suite(report):
    for r in report.files:
        if not r.entry.expects_accept:
            [d] = r.diagnostics
            assert d.cls == r.entry.outcome
            assert d.span.line >= 1 and d.span.col >= 1 and d.span.file


def test_coe_mutant_is_localized(report):
    [d] = report.result("coe_without_ctr.htt").diagnostics
    assert d.cls == "TypeMismatch" and d.decl == "coe'"


def test_empty_manifest(base, tmp_path):
    rep = verify_corpus(CorpusManifest(tmp_path, []), base)
    assert rep.files == [] and rep.mismatches == [] and rep.graph == {}


def test_wrong_expectation_is_a_harness_mismatch(manifest, base):
    e = manifest.entry("uip_swapped.htt")
    lying = CorpusManifest(manifest.root, manifest.positives()[:4] + [
        ManifestEntry(e.path, e.pragmas, "KDisabled", "chain", e.names),
        ManifestEntry("positive/model_tpt.htt", ("with-K",), "accept", "chain", ("model_tpt",)),
    ])
    rep = verify_corpus(lying, base)
    assert [m.path for m in rep.mismatches] == [e.path, "positive/model_tpt.htt"]
    with pytest.raises(HarnessMismatch):
        verify_corpus(lying, base, strict=True)


def test_dependency_claim(report):
    assert dependency_check(report)
    assert "eta" in closure(report.graph, "SigElimDerived")
    assert {"fpr", "spr"} <= closure(report.graph, "SigCompDerived")


def test_fresh_file_is_namespaced(report):
    assert "appendix.htt:subst" in report.graph
    assert "appendix.htt:fst" in closure(report.graph, "appendix.htt:substIsRegular")
    assert "fst" not in closure(report.graph, "appendix.htt:substIsRegular")


DOCTOR = """  = fun A B e x =>
      let unused : (C : Set l) -> (D : C -> Set l) -> (z : SIG {l, l} C D)
          -> EQ {lmax l l} (SIG {l, l} C D) (pairing {l, l} C D (fst {l, l} C D z) (snd {l, l} C D z)) z
        = eta {l, l} in
"""


@pytest.fixture(scope="module")
def doctored(manifest, tmp_path_factory):
    root = tmp_path_factory.mktemp("doctored")
    shutil.copytree(manifest.root, root, dirs_exist_ok=True)
    f = root / "positive" / "coe_lemma21.htt"
    text = f.read_text()
    head, tail = text.split("def coe [l]", 1)
    sig_line, rest = tail.split("  = fun A B e x =>\n", 1)
    f.write_text(head + "def coe [l]" + sig_line + DOCTOR + rest)
    return load_manifest(root)


def test_doctored_corpus_fails_dependency_check(doctored, base):
    rep = verify_corpus(doctored, base)
    assert rep.ok, [str(m) for m in rep.mismatches]
    assert not dependency_check(rep)
    bad = dependency_violations(rep.graph)
    assert ("coe", "eta") in bad
    assert all(path[-1] == "eta" for path in bad)


def test_reordering_within_a_file(report, manifest):
    r = report.result("reasoning_fig2.htt")
    parsed = parse_file(manifest.root / r.entry.path)
    resolved = resolve(parsed.decls, r.start.arities())
    names = {d.name for d in resolved}
    deps = {d.name: d.deps & names for d in resolved}
    # a dependency-respecting order that differs from the file's own
    order, placed = [], set()
    while len(order) < len(parsed.decls):
        pick = [d for d in parsed.decls if d.name not in placed and deps[d.name] <= placed][-1]
        order.append(pick)
        placed.add(pick.name)
    assert [d.name for d in order] != [d.name for d in parsed.decls]
    parsed.decls = order
    rep = check_module(r.start, parsed)
    assert rep.ok and set(rep.accepted) == set(r.accepted)


def test_model_types_match_axioms(chain):
    assert model_mismatches(chain) == []
    models = [MODEL_RENAMING[a] for a in AXIOMS]
    assert len(set(models)) == len(models)


def test_model_mapping_catches_a_wrong_type(chain):
    wrong = dict(MODEL_RENAMING, fst="model_snd", snd="model_fst")
    assert set(model_mismatches(chain, ("fst", "snd"), wrong)) == {"fst", "snd"}


def test_k_localization(report, manifest):
    assert report.result("model_nok.htt").report.pragmas == []
    r = report.result("model_tpt.htt")
    text = (manifest.root / r.entry.path).read_text()
    stripped = "\n".join(x for x in text.splitlines() if x.strip() != "#with-K")
    [d] = check_source(r.start, stripped, "model_tpt.htt").diagnostics
    assert d.cls == "KDisabled" and "#with-K" in d.message
    assert check_source(r.start, text, "model_tpt.htt").ok


def test_typal_computation_witnesses(chain, report):
    for n in COMPUTATION_WITNESSES:
        assert chain[n].kind == "def"
    assert "appendix.htt:substIsRegular" in report.graph


def test_roots_are_all_present(report):
    assert set(SIGMA_FREE_ROOTS) <= set(report.graph)


def test_report_is_deterministic(manifest, base, report):
    again = verify_corpus(manifest, base)
    assert [(r.entry, r.accepted, r.diagnostics) for r in again.files] == \
        [(r.entry, r.accepted, r.diagnostics) for r in report.files]
    assert again.graph == report.graph
