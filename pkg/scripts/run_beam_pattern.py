#!/usr/bin/env python3
"""Linear and distortion beam patterns for the optimizer vs. matched filter."""
import sys

from dabf.cli import main

if __name__ == "__main__":
    sys.exit(main(["beam-pattern", "--out", "results/beam_pattern", *sys.argv[1:]]))
