#!/usr/bin/env python3
"""Run the full theory-verification suite and write the JSONL report."""

import sys

from bqsl.cli import main

if __name__ == "__main__":
    sys.exit(main(["verify", "--report", "verification_reports.jsonl"] + sys.argv[1:]))
