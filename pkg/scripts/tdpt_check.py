#!/usr/bin/env python3
"""Run the tdpt study with the bundled config; outputs land in runs/tdpt_check/."""
import os
import sys

from thermalsim.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    config = os.path.join(HERE, "configs", "tdpt.cfg")
    sys.exit(main(["tdpt", "--config", config, "--out", "runs/tdpt_check", *sys.argv[1:]]))
