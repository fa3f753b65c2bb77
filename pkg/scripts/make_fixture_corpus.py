#!/usr/bin/env python
"""Generate the synthetic fixture corpus (bundles, ground truth, scripted
backend answers, concatenated batches) under a target directory.

Usage: python scripts/make_fixture_corpus.py [OUT_DIR]   (default: fixtures/)
"""

import json
import sys
from pathlib import Path

from madp.fixtures import build_corpus


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("fixtures")
    summary = build_corpus(out)
    print(json.dumps({"root": str(out), **summary}, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
