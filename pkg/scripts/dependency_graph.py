"""Print the corpus dependency graph (Graphviz dot) or one decl's closure."""

import argparse
import sys

from htt.corpus import CORPUS_DIR, SIGMA_EQUATIONS, closure, load_manifest, verify_corpus
from htt.typecheck import base_signature


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dir", default=str(CORPUS_DIR))
    ap.add_argument("--closure", metavar="NAME", help="print the transitive dependencies of NAME")
    ap.add_argument("--builtins", action="store_true", help="keep built-in nodes in the dot output")
    args = ap.parse_args()
    sys.setrecursionlimit(20000)
    report = verify_corpus(load_manifest(args.dir))
    if args.closure:
        deps = closure(report.graph, args.closure)
        print(" ".join(sorted(deps)))
        hit = sorted(deps & set(SIGMA_EQUATIONS))
        print(f"uses {', '.join(hit)}" if hit else "uses none of " + ", ".join(SIGMA_EQUATIONS))
        return 0
    hidden = set() if args.builtins else set(base_signature().names())
    print("digraph corpus {")
    print("  rankdir=BT; node [shape=box, fontname=monospace];")
    for name in SIGMA_EQUATIONS:
        print(f'  "{name}" [style=filled, fillcolor=lightgrey];')
    for name, deps in report.graph.items():
        for d in sorted(deps - hidden):
            print(f'  "{name}" -> "{d}";')
    print("}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
