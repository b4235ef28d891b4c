#!/usr/bin/env python3
"""Fit the error model to the error-vs-tau CSV, then evaluate predictions.

Run scripts/error_vs_tau.py first so runs/error_vs_tau/ holds the curve.
"""
import os
import sys

from thermalsim.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    code = main(["fit", "--config", os.path.join(HERE, "configs", "fit.cfg"),
                 "--out", "runs/fit"])
    if code == 0:
        code = main(["predict", "--config", os.path.join(HERE, "configs", "predict.cfg")])
    sys.exit(code)
