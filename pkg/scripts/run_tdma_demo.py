#!/usr/bin/env python3
"""Per-slot re-placement TDMA rates for three users on one waveguide."""

import argparse
import sys
from pathlib import Path

from pinchsim import cli
from pinchsim.presets import tdma_scenario
from pinchsim.scenario_io import save_scenario


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/tdma_demo")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    out = Path(args.out)
    scenario = save_scenario(tdma_scenario(), out / "scenario.yaml")
    return cli.main(["tdma-demo", "--scenario", str(scenario), "--out", str(out),
                     "--seed", str(args.seed)])


if __name__ == "__main__":
    sys.exit(main())
