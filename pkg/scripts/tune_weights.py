#!/usr/bin/env python3
"""Grid search over attribute-weight ratios on the synthetic corpus.

Sweeps error-code and error-message weights relative to the remaining
attributes (fixed at 1.0) with 5-fold cross-validation, on both an easy
and a deliberately hard corpus (extra overlap pairs, higher noise). Run
this before changing the default FeatureWeights.
"""

from __future__ import annotations

import argparse
import itertools

from mira.config import EngineConfig
from mira.evaluation import cross_validate
from mira.synthgen import CorpusSpec, generate_corpus
from mira.types import FeatureWeights


def sweep(corpus, code_grid, msg_grid, folds: int, seed: int):
    rows = []
    for w_code, w_msg in itertools.product(code_grid, msg_grid):
        config = EngineConfig(weights=FeatureWeights(w_code, w_msg, 1.0, 1.0, 1.0))
        result = cross_validate(corpus, config, k_folds=folds, seed=seed)
        rows.append((w_code, w_msg, result.weighted_f1, result.macro_f1,
                     result.false_uncertainty_rate))
        print(f"  code={w_code:<4} msg={w_msg:<4} weighted={result.weighted_f1:.4f} "
              f"macro={result.macro_f1:.4f} fu={result.false_uncertainty_rate:.4f}")
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--folds", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    specs = {
        "standard": CorpusSpec(seed=20240801, n_classes=25, n_events=5000, overlap_pairs=2),
        "hard-overlap": CorpusSpec(seed=424242, n_classes=20, n_events=3000,
                                   overlap_pairs=5, temp_token_rate=0.5),
    }
    code_grid = [1.0, 2.0, 3.0]
    msg_grid = [1.0, 2.0, 3.0, 5.0]

    for name, spec in specs.items():
        print(f"\n=== {name} corpus ===")
        corpus, _ = generate_corpus(spec)
        rows = sweep(corpus, code_grid, msg_grid, args.folds, args.seed)
        best = max(rows, key=lambda r: (r[2], r[3], -r[4]))
        print(f"best: code={best[0]} msg={best[1]} "
              f"weighted={best[2]:.4f} macro={best[3]:.4f} fu={best[4]:.4f}")
    print("\ncurrent defaults: code=2.0 msg=3.0 others=1.0")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
