"""Verify the corpus and print a per-file table with timings."""

import argparse
import sys

from htt.corpus import CORPUS_DIR, dependency_violations, format_violation, load_manifest, verify_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("dir", nargs="?", default=str(CORPUS_DIR))
    args = ap.parse_args()
    sys.setrecursionlimit(20000)
    report = verify_corpus(load_manifest(args.dir))
    bad = {m.path: m.reason for m in report.mismatches}
    for r in report.files:
        got = "accept" if not r.diagnostics else r.diagnostics[0].cls
        status = "ok" if r.entry.path not in bad else "MISMATCH"
        print(f"{r.entry.path:40} {got:20} {len(r.accepted):3} decls {r.seconds * 1000:8.1f} ms  {status}")
        if r.entry.path in bad:
            print(f"    {bad[r.entry.path]}")
    for path in dependency_violations(report.graph):
        print(f"dependency violation: {format_violation(path)}")
    print(report.summary())
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
