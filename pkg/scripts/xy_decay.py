#!/usr/bin/env python3
"""Run the xy_decay study with the bundled config; outputs land in runs/xy_decay/."""
import os
import sys

from thermalsim.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    config = os.path.join(HERE, "configs", "xy_decay.cfg")
    sys.exit(main(["xy-decay", "--config", config, "--out", "runs/xy_decay", *sys.argv[1:]]))
