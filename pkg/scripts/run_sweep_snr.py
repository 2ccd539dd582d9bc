#!/usr/bin/env python3
"""Ergodic sum rate vs. SNR at the reference scale."""
import sys

from dabf.cli import main

if __name__ == "__main__":
    sys.exit(main(["sweep-snr", "--out", "results/sweep_snr", *sys.argv[1:]]))
