#!/usr/bin/env python3
"""Scaling probes: overhead slope in N and SL/baseline runtime ratio."""

import sys

from bqsl.cli import main

if __name__ == "__main__":
    sys.exit(main(["complexity", "--out", "complexity.json"] + sys.argv[1:]))
