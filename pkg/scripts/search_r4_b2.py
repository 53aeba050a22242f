#!/usr/bin/env python3
"""Attack the open maximum-independent-set case on the 29-element semigroup.

Runs the exact branch-and-bound on A+(B_2), seeded with the known
14-element independent set, and prints the proven value (or bounds if the
budget runs out). The conjectured value is 14.

Usage:
  python scripts/search_r4_b2.py --budget 1800 --out r4_b2.json
"""

import argparse
import json
import sys
from pathlib import Path

from brandt_ranks.affine import a_plus_semigroup
from brandt_ranks.ranks import (
    SearchBudget,
    a_plus_strata_caps,
    construct_witness,
    upper_rank_search,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--budget", type=float, default=1800.0, help="seconds")
    parser.add_argument("--node-limit", type=int, default=10**9)
    parser.add_argument("--strata-caps", action="store_true")
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()

    sg = a_plus_semigroup(2)
    budget = SearchBudget(seconds=args.budget, node_limit=args.node_limit)
    caps = a_plus_strata_caps(2, sg) if args.strata_caps else None
    result = upper_rank_search(sg, budget, strata_bounds=caps, seed=construct_witness(2, "P2"))

    payload = {"n": 2, "r4": result.to_json_dict()}
    print(json.dumps(payload, indent=2))
    if args.out:
        args.out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if result.exact:
        print(f"\nexact maximum independent set size: {result.value}", file=sys.stderr)
        return 0
    print(f"\nbounds only: {result.bounds}", file=sys.stderr)
    return 3


if __name__ == "__main__":
    sys.exit(main())
