"""Complex channel synthesis: free-space loss, LoS sampling, in-guide phase.

The aggregate gain from waveguide m to user k is the coherent sum over that
guide's activated antennas of

    weight * exp(-j*2*pi*offset/lambda_g - alpha*offset)      (in-guide)
           * (lambda_0 / (4*pi*d)) * exp(-j*2*pi*d/lambda_0)  (free space),

with an extra 10^(-penalty_db/20) amplitude factor on NLoS links.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import (
    CarrierSpec,
    LoSModelConfig,
    PinchingLayout,
    Scenario,
    WaveguideSpec,
)


def guided_wavelength(lambda0_m: float, eps_r: float) -> float:
    """Wavelength inside a dielectric guide: lambda0 / sqrt(eps_r)."""
    if lambda0_m <= 0:
        raise ValueError(f"free-space wavelength must be positive, got {lambda0_m!r}")
    if eps_r < 1.0:
        raise ValueError(f"relative permittivity must be >= 1, got {eps_r!r}")
    return lambda0_m / math.sqrt(eps_r)


@dataclass(frozen=True, eq=False)
class GuidedWave:
    """Guided wavelength and derived wavenumber for one guide/carrier pair."""

    guided_wavelength_m: float

    @property
    def wavenumber_rad_per_m(self) -> float:
        return 2.0 * math.pi / self.guided_wavelength_m

    @classmethod
    def for_waveguide(cls, carrier: CarrierSpec, w: WaveguideSpec) -> "GuidedWave":
        return cls(guided_wavelength(carrier.free_space_wavelength_m,
                                     w.relative_permittivity))


def los_probability(model: LoSModelConfig, distance):
    """LoS probability at a given distance (scalar or array), in [0, 1]."""
    d = np.asarray(distance, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be nonnegative")
    if model.kind == "always_los":
        p = np.ones_like(d)
    elif model.kind == "exponential":
        p = np.exp(-model.rho_los_per_m * d)
    elif model.kind == "inmo":
        p = np.where(
            d <= model.inmo_near_m,
            1.0,
            np.where(
                d < model.inmo_far_m,
                np.exp(-(d - model.inmo_near_m) / model.inmo_near_decay_m),
                model.inmo_far_scale * np.exp(-(d - model.inmo_far_m) / model.inmo_far_decay_m),
            ),
        )
    else:
        raise ValueError(f"unknown LoS model kind {model.kind!r}")
    return float(p) if np.ndim(distance) == 0 else p


def free_space_gain(distance_m, lambda0_m: float, los=True, nlos_extra_loss_db: float = 20.0):
    """Spherical-wave complex gain over a free-space link.

    Amplitude lambda0/(4*pi*d), phase -2*pi*d/lambda0; NLoS links are
    attenuated by an extra ``nlos_extra_loss_db`` dB of amplitude.
    Accepts scalars or broadcasting arrays.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("link distance must be positive")
    if lambda0_m <= 0:
        raise ValueError("free-space wavelength must be positive")
    g = lambda0_m / (4.0 * np.pi * d) * np.exp(-2j * np.pi * d / lambda0_m)
    penalty = 10.0 ** (-nlos_extra_loss_db / 20.0)
    g = np.where(np.asarray(los, dtype=bool), g, g * penalty)
    return complex(g) if np.ndim(g) == 0 else g


def in_guide_factor(w: WaveguideSpec, gw: GuidedWave, offset):
    """Complex propagation factor from the feed to an offset along the guide."""
    t = np.asarray(offset, dtype=float)
    f = np.exp(-1j * gw.wavenumber_rad_per_m * t) * np.exp(-w.guide_attenuation_np_per_m * t)
    return complex(f) if np.ndim(offset) == 0 else f


@dataclass(frozen=True, eq=False)
class LinkGain:
    """One free-space link: complex gain plus LoS provenance."""

    complex_gain: complex
    los_state: bool
    distance_m: float


def free_space_link(distance_m: float, lambda0_m: float, los: bool,
                    nlos_extra_loss_db: float = 20.0) -> LinkGain:
    g = free_space_gain(distance_m, lambda0_m, los, nlos_extra_loss_db)
    return LinkGain(complex(g), bool(los), float(distance_m))


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Users-by-feeds complex gains plus the per-antenna breakdown.

    ``gains[k, m]`` aggregates waveguide m's antennas toward user k;
    ``per_antenna_breakdown[k, n]`` holds the weight-inclusive summands
    (so each aggregate entry is the row-sum of its guide's columns).
    ``antenna_guide_index`` maps breakdown columns to waveguides.
    """

    gains: np.ndarray
    per_antenna_breakdown: np.ndarray | None = None
    los_states: np.ndarray | None = None
    antenna_guide_index: tuple[int, ...] = ()
    antenna_offsets: tuple[float, ...] = ()

    @property
    def n_users(self) -> int:
        return self.gains.shape[0]

    @property
    def n_feeds(self) -> int:
        return self.gains.shape[1]


def antenna_positions(s: Scenario, layout: PinchingLayout) -> np.ndarray:
    """3-D positions of every activated antenna, flattened guide-major."""
    pts = [w.feed_point + t * w.axis_direction
           for w, offs in zip(s.waveguides, layout.offsets_per_guide)
           for t in offs]
    return np.asarray(pts, dtype=float).reshape(-1, 3)


def build_channel(s: Scenario, layout: PinchingLayout, *,
                  seed=None, los_states=None) -> ChannelMatrix:
    """Synthesize the users-by-feeds channel for a given antenna layout.

    LoS states are either supplied explicitly (anything broadcastable to a
    (users, antennas) boolean array, e.g. ``True`` to force LoS everywhere)
    or sampled once per link from the scenario's LoS model using ``seed``.
    Sampling is reproducible: a fixed seed yields bit-identical channels.
    """
    if len(layout.offsets_per_guide) != len(s.waveguides):
        raise ValueError(
            f"layout covers {len(layout.offsets_per_guide)} waveguides, "
            f"scenario has {len(s.waveguides)}")
    problems = layout.violations(s.waveguides)
    if problems:
        raise ValueError("invalid layout: " + "; ".join(v.code for v in problems))

    lambda0 = s.carrier.free_space_wavelength_m
    users = s.users.positions
    n_users = users.shape[0]
    n_guides = len(s.waveguides)

    guide_idx = tuple(g for g, offs in enumerate(layout.offsets_per_guide)
                      for _ in offs)
    all_offsets = tuple(t for offs in layout.offsets_per_guide for t in offs)
    n_ant = len(all_offsets)
    if n_ant == 0:
        raise ValueError("layout activates no antennas")

    apos = antenna_positions(s, layout)
    dist = np.linalg.norm(users[:, None, :] - apos[None, :, :], axis=2)
    if np.any(dist < 1e-9):
        raise ValueError("an activated antenna coincides with a user position")

    if los_states is not None:
        los = np.broadcast_to(np.asarray(los_states, dtype=bool),
                              (n_users, n_ant)).copy()
    elif s.los_model.kind == "always_los":
        los = np.ones((n_users, n_ant), dtype=bool)
    elif seed is not None:
        rng = np.random.default_rng(seed)
        los = rng.uniform(size=(n_users, n_ant)) < los_probability(s.los_model, dist)
    else:
        raise ValueError(
            "LoS sampling needs a seed (or pass explicit los_states) when the "
            f"LoS model is probabilistic ({s.los_model.kind!r})")

    fs = free_space_gain(dist, lambda0, los, s.los_model.nlos_extra_loss_db)

    weights = np.asarray([w for ws in layout.weights_per_guide for w in ws])
    ig = np.concatenate([
        np.atleast_1d(in_guide_factor(w, GuidedWave.for_waveguide(s.carrier, w),
                                      np.asarray(offs, dtype=float)))
        for w, offs in zip(s.waveguides, layout.offsets_per_guide) if len(offs)
    ])

    breakdown = fs * (weights * ig)[None, :]
    gains = np.zeros((n_users, n_guides), dtype=complex)
    col = np.asarray(guide_idx)
    for g in range(n_guides):
        sel = col == g
        if np.any(sel):
            gains[:, g] = breakdown[:, sel].sum(axis=1)

    return ChannelMatrix(gains=gains,
                         per_antenna_breakdown=breakdown,
                         los_states=los,
                         antenna_guide_index=guide_idx,
                         antenna_offsets=all_offsets)
