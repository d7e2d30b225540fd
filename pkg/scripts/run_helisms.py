#!/usr/bin/env python3
"""
helisms Runner

Command-line entry point; see ``src/cli.py`` for the subcommands.
"""

import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli import main


if __name__ == "__main__":
    raise SystemExit(main())
