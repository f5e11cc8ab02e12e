#!/usr/bin/env python3
"""Rate map of a fixed-feed antenna vs a user-tracking pinched antenna.

Writes the default single-guide scenario and a heatmap CSV under --out.
"""

import argparse
import sys
from pathlib import Path

from pinchsim import cli
from pinchsim.presets import heatmap_scenario
from pinchsim.scenario_io import save_scenario


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/heatmap")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--grid-res", type=float, default=0.25)
    parser.add_argument("--los", default="inmo",
                        choices=["inmo", "exponential", "always_los"])
    parser.add_argument("--snr-db", type=float, default=100.0,
                        help="transmit SNR written into the scenario file")
    args = parser.parse_args()

    out = Path(args.out)
    scenario = save_scenario(heatmap_scenario(los_kind=args.los, snr_db=args.snr_db),
                             out / "scenario.yaml")
    return cli.main(["heatmap", "--scenario", str(scenario), "--out", str(out),
                     "--seed", str(args.seed), "--grid-res", str(args.grid_res)])


if __name__ == "__main__":
    sys.exit(main())
