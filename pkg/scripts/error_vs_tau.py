#!/usr/bin/env python3
"""Run the error_vs_tau study with the bundled config; outputs land in runs/error_vs_tau/."""
import os
import sys

from thermalsim.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    config = os.path.join(HERE, "configs", "error_vs_tau.cfg")
    sys.exit(main(["dynamics", "--config", config, "--out", "runs/error_vs_tau", *sys.argv[1:]]))
