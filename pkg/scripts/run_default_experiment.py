#!/usr/bin/env python3
"""Run the shipped beta-sweep experiment and print its report."""

import argparse
import logging
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from src.experiment import StageError, report, run

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DEFAULT_CONFIG = PROJECT_ROOT / "configs" / "classified-beta-sweep.toml"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", type=Path, default=DEFAULT_CONFIG)
    parser.add_argument("--out", type=Path, default=None)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--force", action="store_true")
    args = parser.parse_args()
    try:
        manifest = run(args.config, args.out, force=args.force, threads=args.threads)
    except StageError as exc:
        logger.error("run_default_experiment failed: %s", exc)
        return 3
    text, code = report(manifest)
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
