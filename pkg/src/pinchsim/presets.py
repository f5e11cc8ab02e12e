"""Ready-made desk-scale scenarios for the experiment drivers.

Defaults: 28 GHz carrier, PTFE guides (eps_r 2.1) at 3 m height, 20 m
guides along y, users on the ground plane of a 10 m x 10 m region.
"""

from __future__ import annotations

import numpy as np

from .scenario import (
    CarrierSpec,
    LoSModelConfig,
    Scenario,
    UserSet,
    WaveguideSpec,
)

DEFAULT_FREQUENCY_HZ = 28e9
DEFAULT_HEIGHT_M = 3.0
DEFAULT_GUIDE_LENGTH_M = 20.0
DEFAULT_EPS_R = 2.1


def _guide(x: float, length: float = DEFAULT_GUIDE_LENGTH_M,
           height: float = DEFAULT_HEIGHT_M) -> WaveguideSpec:
    return WaveguideSpec(feed_point=(x, -length / 2.0, height),
                         axis_direction=(0.0, 1.0, 0.0),
                         length_m=length,
                         relative_permittivity=DEFAULT_EPS_R)


def heatmap_scenario(los_kind: str = "inmo", snr_db: float = 100.0) -> Scenario:
    """Single guide along y; one placeholder user (the heatmap sweeps cells)."""
    return Scenario(
        carrier=CarrierSpec(DEFAULT_FREQUENCY_HZ),
        waveguides=(_guide(0.0),),
        users=UserSet([(0.0, 0.0, 0.0)]),
        transmit_snr=10.0 ** (snr_db / 10.0),
        los_model=LoSModelConfig(kind=los_kind),
    )


def compare_scenario(n_guides: int = 3, n_users: int = 3, square_m: float = 10.0,
                     los_kind: str = "inmo", snr_db: float = 10.0) -> Scenario:
    """Parallel guides spread evenly across the user square; user positions
    are placeholders (the comparison draws seeded random drops)."""
    xs = (np.arange(n_guides) - (n_guides - 1) / 2.0) * (square_m / n_guides)
    return Scenario(
        carrier=CarrierSpec(DEFAULT_FREQUENCY_HZ),
        waveguides=tuple(_guide(float(x)) for x in xs),
        users=UserSet([(0.0, 0.0, 0.0)] * n_users),
        transmit_snr=10.0 ** (snr_db / 10.0),
        los_model=LoSModelConfig(kind=los_kind),
    )


def noma_scenario(asymmetric: bool = True, snr_db: float = 110.0) -> Scenario:
    """Single guide with two users; the symmetric variant mirrors them about
    the guide axis so their channel gains are equal at every offset."""
    users = [(1.0, -2.0, 0.0), (3.5, 6.0, 0.0)] if asymmetric \
        else [(2.0, 3.0, 0.0), (-2.0, 3.0, 0.0)]
    return Scenario(
        carrier=CarrierSpec(DEFAULT_FREQUENCY_HZ),
        waveguides=(_guide(0.0),),
        users=UserSet(users),
        transmit_snr=10.0 ** (snr_db / 10.0),
        los_model=LoSModelConfig(kind="always_los"),
    )


def tdma_scenario(snr_db: float = 100.0) -> Scenario:
    """Single guide with three users spread along it."""
    return Scenario(
        carrier=CarrierSpec(DEFAULT_FREQUENCY_HZ),
        waveguides=(_guide(0.0),),
        users=UserSet([(1.0, -7.0, 0.0), (2.0, 0.5, 0.0), (0.5, 8.0, 0.0)]),
        transmit_snr=10.0 ** (snr_db / 10.0),
        los_model=LoSModelConfig(kind="always_los"),
    )
