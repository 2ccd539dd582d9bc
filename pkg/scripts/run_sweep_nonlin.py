#!/usr/bin/env python3
"""Ergodic sum rate vs. PA nonlinearity level at the reference scale.

Forwards any extra CLI flags (e.g. --realizations 100 --workers 2 --seed 1).
"""
import sys

from dabf.cli import main

if __name__ == "__main__":
    sys.exit(main(["sweep-nonlin", "--out", "results/sweep_nonlin", *sys.argv[1:]]))
