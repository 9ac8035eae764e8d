#!/usr/bin/env python3
"""Write a synthetic region CSV with known dynamics to a file.

The generator is seeded, so the same arguments always produce the same
series; seed 2020 is the frozen fixture the test suite trains on.
"""
from __future__ import annotations

import argparse
from pathlib import Path

from interveno.synthetic import generate_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", type=Path, help="destination CSV path")
    parser.add_argument("--region", default="CA", help="region id to stamp on rows")
    parser.add_argument("--days", type=int, default=240, help="series length")
    parser.add_argument("--seed", type=int, default=2020, help="generator seed")
    args = parser.parse_args()
    args.out.write_text(
        generate_csv(region_id=args.region, n_days=args.days, seed=args.seed),
        encoding="utf-8",
    )
    print(f"wrote {args.out} ({args.region}, {args.days} days, seed {args.seed})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
