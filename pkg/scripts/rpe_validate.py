#!/usr/bin/env python3
"""Run the rpe_validate study with the bundled config; outputs land in runs/rpe_validate/."""
import os
import sys

from thermalsim.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    config = os.path.join(HERE, "configs", "rpe_validate.cfg")
    sys.exit(main(["sample-rpe", "--config", config, "--out", "runs/rpe_validate", *sys.argv[1:]]))
