#!/usr/bin/env python3
"""Run the scar study with the bundled config; outputs land in runs/scar_vs_thermal/."""
import os
import sys

from thermalsim.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    config = os.path.join(HERE, "configs", "scar.cfg")
    sys.exit(main(["scar", "--config", config, "--out", "runs/scar_vs_thermal", *sys.argv[1:]]))
