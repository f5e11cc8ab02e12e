"""Scenario and layout (de)serialization.

Scenario files are YAML trees with nested ``carrier`` / ``waveguides`` /
``users`` / ``los_model`` sections. On-disk units: meters for coordinates,
Hz for frequencies, dB for the transmit SNR (converted to linear in memory).

Example::

    carrier:
      frequency_hz: 28.0e9
    transmit_snr_db: 10.0
    los_model:
      kind: inmo                # exponential | inmo | always_los
      rho_los_per_m: 0.1        # exponential kind only
      nlos_extra_loss_db: 20.0
    waveguides:
      - feed_point_m: [0.0, -10.0, 3.0]
        axis_direction: [0.0, 1.0, 0.0]
        length_m: 20.0
        relative_permittivity: 2.1
        guide_attenuation_np_per_m: 0.0
    users:
      - [1.0, 2.0, 0.0]
"""

from __future__ import annotations

import math
from pathlib import Path

import yaml

from .scenario import (
    CarrierSpec,
    LoSModelConfig,
    PinchingLayout,
    Scenario,
    UserSet,
    WaveguideSpec,
)


class ScenarioFormatError(ValueError):
    """A scenario file is structurally invalid; the message says where."""


def _require(mapping, key, context):
    if not isinstance(mapping, dict):
        raise ScenarioFormatError(f"{context}: expected a mapping, got {type(mapping).__name__}")
    if key not in mapping:
        raise ScenarioFormatError(f"{context}: missing required key {key!r}")
    return mapping[key]


def _number(value, context) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(f"{context}: expected a number, got {value!r}")
    return float(value)


def _vector3(value, context):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ScenarioFormatError(f"{context}: expected [x, y, z], got {value!r}")
    return [_number(v, context) for v in value]


def scenario_from_dict(data: dict) -> Scenario:
    carrier = CarrierSpec(_number(_require(_require(data, "carrier", "scenario"),
                                           "frequency_hz", "carrier"), "carrier.frequency_hz"))
    snr_db = _number(_require(data, "transmit_snr_db", "scenario"), "transmit_snr_db")

    los_raw = data.get("los_model", {}) or {}
    defaults = LoSModelConfig()
    known = {"kind", "rho_los_per_m", "nlos_extra_loss_db",
             "inmo_near_m", "inmo_far_m", "inmo_near_decay_m",
             "inmo_far_decay_m", "inmo_far_scale"}
    extra = set(los_raw) - known
    if extra:
        raise ScenarioFormatError(f"los_model: unknown keys {sorted(extra)}")
    los = LoSModelConfig(
        kind=str(los_raw.get("kind", defaults.kind)),
        rho_los_per_m=_number(los_raw.get("rho_los_per_m", defaults.rho_los_per_m),
                              "los_model.rho_los_per_m"),
        nlos_extra_loss_db=_number(los_raw.get("nlos_extra_loss_db",
                                               defaults.nlos_extra_loss_db),
                                   "los_model.nlos_extra_loss_db"),
        inmo_near_m=_number(los_raw.get("inmo_near_m", defaults.inmo_near_m), "los_model"),
        inmo_far_m=_number(los_raw.get("inmo_far_m", defaults.inmo_far_m), "los_model"),
        inmo_near_decay_m=_number(los_raw.get("inmo_near_decay_m",
                                              defaults.inmo_near_decay_m), "los_model"),
        inmo_far_decay_m=_number(los_raw.get("inmo_far_decay_m",
                                             defaults.inmo_far_decay_m), "los_model"),
        inmo_far_scale=_number(los_raw.get("inmo_far_scale", defaults.inmo_far_scale),
                               "los_model"),
    )

    guides_raw = _require(data, "waveguides", "scenario")
    if not isinstance(guides_raw, list):
        raise ScenarioFormatError("waveguides: expected a list")
    guides = []
    for i, g in enumerate(guides_raw):
        ctx = f"waveguides[{i}]"
        guides.append(WaveguideSpec(
            feed_point=_vector3(_require(g, "feed_point_m", ctx), f"{ctx}.feed_point_m"),
            axis_direction=_vector3(_require(g, "axis_direction", ctx), f"{ctx}.axis_direction"),
            length_m=_number(_require(g, "length_m", ctx), f"{ctx}.length_m"),
            relative_permittivity=_number(g.get("relative_permittivity", 2.1),
                                          f"{ctx}.relative_permittivity"),
            guide_attenuation_np_per_m=_number(g.get("guide_attenuation_np_per_m", 0.0),
                                               f"{ctx}.guide_attenuation_np_per_m"),
        ))

    users_raw = _require(data, "users", "scenario")
    if not isinstance(users_raw, list) or not users_raw:
        raise ScenarioFormatError("users: expected a non-empty list of [x, y, z]")
    users = UserSet([_vector3(u, f"users[{i}]") for i, u in enumerate(users_raw)])

    return Scenario(carrier=carrier, waveguides=tuple(guides), users=users,
                    transmit_snr=10.0 ** (snr_db / 10.0), los_model=los)


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "carrier": {"frequency_hz": s.carrier.frequency_hz},
        "transmit_snr_db": 10.0 * math.log10(s.transmit_snr),
        "los_model": {
            "kind": s.los_model.kind,
            "rho_los_per_m": s.los_model.rho_los_per_m,
            "nlos_extra_loss_db": s.los_model.nlos_extra_loss_db,
        },
        "waveguides": [
            {
                "feed_point_m": [float(v) for v in w.feed_point],
                "axis_direction": [float(v) for v in w.axis_direction],
                "length_m": w.length_m,
                "relative_permittivity": w.relative_permittivity,
                "guide_attenuation_np_per_m": w.guide_attenuation_np_per_m,
            }
            for w in s.waveguides
        ],
        "users": [[float(v) for v in u] for u in s.users.positions],
    }


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioFormatError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioFormatError(f"{path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioFormatError(f"{path}: top level must be a mapping")
    return scenario_from_dict(data)


def save_scenario(s: Scenario, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(scenario_to_dict(s), sort_keys=False), encoding="utf-8")
    return path


def layout_to_dict(layout: PinchingLayout) -> dict:
    return {
        "minimum_spacing_m": layout.minimum_spacing_m,
        "waveguides": [
            {"offsets_m": list(offs), "weights": list(ws)}
            for offs, ws in zip(layout.offsets_per_guide, layout.weights_per_guide)
        ],
    }


def layout_from_dict(data: dict) -> PinchingLayout:
    guides = _require(data, "waveguides", "layout")
    offs = tuple(tuple(_number(x, "layout.offsets_m") for x in _require(g, "offsets_m", "layout"))
                 for g in guides)
    ws = tuple(tuple(_number(x, "layout.weights") for x in _require(g, "weights", "layout"))
               for g in guides)
    return PinchingLayout(offs, ws, _number(data.get("minimum_spacing_m", 0.0),
                                            "layout.minimum_spacing_m"))


def save_layout(layout: PinchingLayout, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(layout_to_dict(layout), sort_keys=False), encoding="utf-8")
    return path


def solution_to_dict(solution) -> dict:
    return {
        "objective_kind": solution.objective_kind,
        "objective_value": float(solution.objective_value),
        "iterations": int(solution.iterations),
        "converged": bool(solution.converged),
        "layout": layout_to_dict(solution.layout),
    }


def save_solution(solution, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(solution_to_dict(solution), sort_keys=False),
                    encoding="utf-8")
    return path
