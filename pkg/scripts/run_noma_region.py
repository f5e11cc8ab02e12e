#!/usr/bin/env python3
"""Two-user NOMA rate pairs over a power-split sweep on one waveguide."""

import argparse
import sys
from pathlib import Path

from pinchsim import cli
from pinchsim.presets import noma_scenario
from pinchsim.scenario_io import save_scenario


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/noma_region")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--alpha-step", type=float, default=0.01)
    parser.add_argument("--symmetric", action="store_true",
                        help="mirror the users so their gains are equal")
    args = parser.parse_args()

    out = Path(args.out)
    scenario = save_scenario(noma_scenario(asymmetric=not args.symmetric),
                             out / "scenario.yaml")
    return cli.main(["noma-region", "--scenario", str(scenario), "--out", str(out),
                     "--seed", str(args.seed), "--alpha-step", str(args.alpha_step)])


if __name__ == "__main__":
    sys.exit(main())
