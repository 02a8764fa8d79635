#!/usr/bin/env python3
"""
StableBRW - Main Entry Point

Command-line entry point for the stable branching random walk toolkit.
See `python main.py --help` and `python main.py presets`.
"""

import sys

from harness.cli import main

if __name__ == "__main__":
    sys.exit(main())
