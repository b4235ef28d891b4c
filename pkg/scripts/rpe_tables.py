#!/usr/bin/env python3
"""Run the rpe_tables study with the bundled config; outputs land in runs/rpe_tables/."""
import os
import sys

from thermalsim.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    config = os.path.join(HERE, "configs", "rpe_tables.cfg")
    sys.exit(main(["tables", "--config", config, "--out", "runs/rpe_tables", *sys.argv[1:]]))
