"""Bucket counts of the seeded fixture corpus under each key ablation.

Run: python scripts/ablation_study.py [--seed 0] [--n-random 40]
"""

from __future__ import annotations

import argparse

from evidence_atlas.compile import compile_corpus
from evidence_atlas.config import BuildConfig
from evidence_atlas.fixtures import ABLATION_MODES, build_fixtures


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-random", type=int, default=40)
    args = parser.parse_args()

    cards, manifest = build_fixtures(args.seed, args.n_random)
    full = None
    print(f"{'mode':<14}{'buckets':>8}{'expected':>10}{'vs full':>9}  mixed-type buckets")
    for mode in ABLATION_MODES:
        atlas = compile_corpus(cards, BuildConfig(ablation=None if mode == "full" else mode))
        count = len(atlas.edges)
        full = count if full is None else full
        mixed = sum("mixed_mtype" in e.flags for e in atlas.edges)
        print(f"{mode:<14}{count:>8}{manifest['bucket_counts'][mode]:>10}{count - full:>+9}  {mixed}")


if __name__ == "__main__":
    main()
