#!/usr/bin/env python3
"""Run the full verification battery for small n and write a JSON report.

Usage:
  python scripts/verify_small_cases.py --max-n 3 --budget 300 --out report.json
"""

import argparse
import json
import sys
from pathlib import Path

from brandt_ranks.ranks import SearchBudget
from brandt_ranks.verify import verify_all


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-n", type=int, default=3)
    parser.add_argument("--budget", type=float, default=300.0, help="seconds per n")
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()

    reports = []
    all_ok = True
    for n in range(1, args.max_n + 1):
        report = verify_all(n, SearchBudget(seconds=args.budget))
        reports.append(report.to_json_dict())
        all_ok &= report.ok
        print(f"=== n = {n} ===")
        print(report.to_text())
        print()
    if args.out:
        args.out.write_text(json.dumps(reports, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
