"""Exhaustively compare level normal forms with brute-force evaluation.

Enumerates every level expression over {l, m, n} up to the given depth and
checks that grouping by normal form equals grouping by value vector over
valuations in {0..bound}^3.
"""

import argparse
import itertools
import time

import numpy as np

from htt.level import LMax, LSuc, LVar, LZero, level_normalize, show_level


def enumerate_levels(depth, valuations):
    leaves = [LZero()] + [LVar(v) for v in "lmn"]
    leaf_values = np.stack([np.zeros(len(valuations), np.int16)] + [valuations[:, i] for i in range(3)])
    exprs, values = leaves, leaf_values
    for _ in range(depth):
        k = len(exprs)
        maxes = np.maximum(values[:, None, :], values[None, :, :]).reshape(k * k, -1)
        exprs = leaves + [LSuc(e) for e in exprs] + [LMax(a, b) for a in exprs for b in exprs]
        values = np.concatenate([leaf_values, values + 1, maxes])
    return exprs, values


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--bound", type=int, default=3, help="largest value tried for each variable")
    args = ap.parse_args()
    vals = np.array(list(itertools.product(range(args.bound + 1), repeat=3)), dtype=np.int16)
    start = time.perf_counter()
    exprs, values = enumerate_levels(args.depth, vals)
    by_nf, by_value = {}, {}
    clashes = 0
    for e, v in zip(exprs, values):
        nf, key = level_normalize(e), v.tobytes()
        if by_nf.setdefault(nf, key) != key or by_value.setdefault(key, nf) != nf:
            clashes += 1
            if clashes <= 5:
                print("disagreement:", show_level(e), "->", show_level(nf.to_expr()))
    print(f"{len(exprs)} expressions, {len(by_nf)} normal forms, {len(by_value)} value classes, "
          f"{clashes} disagreements, {time.perf_counter() - start:.1f}s")
    return 1 if clashes else 0


if __name__ == "__main__":
    raise SystemExit(main())
