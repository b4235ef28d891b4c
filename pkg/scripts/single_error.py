#!/usr/bin/env python3
"""Run the single_error study with the bundled config; outputs land in runs/single_error/."""
import os
import sys

from thermalsim.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    config = os.path.join(HERE, "configs", "single_error.cfg")
    sys.exit(main(["single-error", "--config", config, "--out", "runs/single_error", *sys.argv[1:]]))
