"""Rank table for the lemma corpus, with per-scenario rank ranges over sampled states.

    python3 scripts/lemma_table.py --states 25 --depth 4
"""

import argparse

from obs_scout.rank import DEFAULT_STATE_SEED, check_lemma_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=25)
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--seed", type=int, default=DEFAULT_STATE_SEED)
    args = ap.parse_args()

    results = check_lemma_suite(args.states, args.seed, args.depth)
    print(f"{'scenario':30s} {'expected':13s} {'actual':13s} ranks   min sv")
    for r in results:
        ranks = f"{min(r.ranks)}-{max(r.ranks)}"
        print(f"{r.scenario.name:30s} {r.scenario.expected or '(record)':13s} {r.actual:13s} {ranks:7s} "
              f"{r.min_singular:.2e}")
        print(f"    {r.scenario.description}")
    bad = [r.scenario.name for r in results if r.passed is False]
    print("all verdicts match" if not bad else f"mismatches: {bad}")


if __name__ == "__main__":
    main()
