#!/usr/bin/env python3
"""Averaged manifold-ascent convergence traces at SNR 0/10/20 dB."""
import sys

from dabf.cli import main

if __name__ == "__main__":
    sys.exit(main(["convergence", "--out", "results/convergence", *sys.argv[1:]]))
