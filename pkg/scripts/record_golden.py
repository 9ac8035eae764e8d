#!/usr/bin/env python3
"""Regenerate tests/golden/*.json from an in-process service.

The recorded responses are the contract the service tests compare against.
Rerun this after an intentional behavior change, then review the diff.
"""
from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import service_recipe as recipe


def main() -> int:
    recipe.GOLDEN_DIR.mkdir(exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        client = recipe.build_client(Path(tmp))
        for name, body in recipe.golden_exchanges(client).items():
            path = recipe.GOLDEN_DIR / f"{name}.json"
            path.write_text(
                json.dumps(body, indent=1, sort_keys=True) + "\n", encoding="utf-8"
            )
            print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
