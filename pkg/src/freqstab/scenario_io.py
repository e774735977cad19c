"""Loading and serializing scenario definitions (JSON).

A scenario file fully determines a study: system parameters, classification
thresholds, the disturbance event, and integration settings.  Bundled studies
ship under freqstab/scenarios/ and are addressable by short name.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .errors import ParseError, SchemaError
from .model import SystemParameters, Thresholds
from .simulator import (Disturbance, RampDisturbance, Scenario,
                        ShortTermDisturbance, StepDisturbance)

_SYSTEM_FIELDS = {f.name for f in dataclasses.fields(SystemParameters)}
_OPTIONAL_SYSTEM = {"p_g", "renewable_lag_s"}

_THRESHOLD_FIELDS = {"k1", "t_dist", "f_d", "df_ss_lim", "df_max_lim",
                     "dp_sh", "df_sh"}
_OPTIONAL_THRESHOLDS = {"dp_sh", "df_sh"}

_DISTURBANCE_FIELDS = {
    "step": {"t0_s", "dp0_mw"},
    "ramp": {"t0_s", "k_mw_per_s", "duration_s"},
    "short_term": {"t0_s", "dp0_mw", "fault_duration_s", "recovery_mw_per_s"},
}

_SIMULATION_FIELDS = {"horizon_s", "dt_s", "deadband_hz"}


@dataclass(frozen=True)
class ScenarioBundle:
    """A named, self-contained study: scenario plus thresholds and notes."""

    name: str
    description: str
    calibration_notes: str
    thresholds: Thresholds
    scenario: Scenario

    @property
    def params(self) -> SystemParameters:
        return self.scenario.params


def _as_mapping(obj: Any, where: str) -> Mapping[str, Any]:
    if not isinstance(obj, Mapping):
        raise SchemaError(f"{where} must be a JSON object")
    return obj


def _check_keys(obj: Mapping[str, Any], allowed: set, required: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise SchemaError(f"missing keys in {where}: {sorted(missing)}")


def _number(obj: Mapping[str, Any], key: str, where: str) -> float:
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SchemaError(f"{where}.{key} must be a number, got {val!r}")
    return float(val)


def parse_bundle(data: Any, origin: str = "scenario") -> ScenarioBundle:
    """Validate a decoded scenario document and build the typed bundle."""
    top = _as_mapping(data, origin)
    _check_keys(top, {"name", "description", "calibration_notes", "system",
                      "thresholds", "disturbance", "simulation"},
                {"name", "system", "thresholds", "disturbance", "simulation"},
                origin)
    name = top["name"]
    if not isinstance(name, str) or not name:
        raise SchemaError(f"{origin}.name must be a non-empty string")

    sys_obj = _as_mapping(top["system"], f"{origin}.system")
    _check_keys(sys_obj, _SYSTEM_FIELDS, _SYSTEM_FIELDS - _OPTIONAL_SYSTEM,
                f"{origin}.system")
    sys_kwargs = {}
    for key in sys_obj:
        if key == "p_g" and sys_obj[key] is None:
            sys_kwargs[key] = None
        else:
            sys_kwargs[key] = _number(sys_obj, key, f"{origin}.system")
    params = SystemParameters(**sys_kwargs)

    th_obj = _as_mapping(top["thresholds"], f"{origin}.thresholds")
    _check_keys(th_obj, _THRESHOLD_FIELDS, _THRESHOLD_FIELDS - _OPTIONAL_THRESHOLDS,
                f"{origin}.thresholds")
    th_kwargs = {key: _number(th_obj, key, f"{origin}.thresholds") for key in th_obj}
    thresholds = Thresholds.derive(params, **th_kwargs)

    dist_obj = _as_mapping(top["disturbance"], f"{origin}.disturbance")
    kind = dist_obj.get("type")
    if kind not in _DISTURBANCE_FIELDS:
        raise SchemaError(
            f"{origin}.disturbance.type must be one of "
            f"{sorted(_DISTURBANCE_FIELDS)}, got {kind!r}")
    fields = _DISTURBANCE_FIELDS[kind]
    _check_keys(dist_obj, fields | {"type"}, fields | {"type"},
                f"{origin}.disturbance")
    dist_kwargs = {key: _number(dist_obj, key, f"{origin}.disturbance")
                   for key in fields}
    disturbance: Disturbance
    if kind == "step":
        disturbance = StepDisturbance(**dist_kwargs)
    elif kind == "ramp":
        disturbance = RampDisturbance(**dist_kwargs)
    else:
        disturbance = ShortTermDisturbance(**dist_kwargs)

    sim_obj = _as_mapping(top["simulation"], f"{origin}.simulation")
    _check_keys(sim_obj, _SIMULATION_FIELDS, {"horizon_s", "dt_s"},
                f"{origin}.simulation")
    horizon_s = _number(sim_obj, "horizon_s", f"{origin}.simulation")
    dt_s = _number(sim_obj, "dt_s", f"{origin}.simulation")
    if "deadband_hz" in sim_obj:
        deadband_hz = _number(sim_obj, "deadband_hz", f"{origin}.simulation")
    else:
        deadband_hz = thresholds.f_d  # governor deadband defaults to the detection one

    scenario = Scenario(params=params, disturbance=disturbance,
                        horizon_s=horizon_s, dt_s=dt_s, deadband_hz=deadband_hz)
    return ScenarioBundle(name=name,
                          description=str(top.get("description", "")),
                          calibration_notes=str(top.get("calibration_notes", "")),
                          thresholds=thresholds, scenario=scenario)


def load_scenario(path: str | Path) -> ScenarioBundle:
    """Read and validate a scenario JSON file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}", row=exc.lineno,
                         column=exc.colno) from exc
    return parse_bundle(data, origin=str(path))


def list_bundled() -> tuple[str, ...]:
    """Names of the scenario studies shipped with the package."""
    root = resources.files("freqstab.scenarios")
    names = [entry.name[:-5] for entry in root.iterdir()
             if entry.name.endswith(".json")]
    return tuple(sorted(names))


def load_bundled(name: str) -> ScenarioBundle:
    """Load a shipped scenario by short name (see list_bundled)."""
    root = resources.files("freqstab.scenarios")
    candidate = root.joinpath(f"{name}.json")
    if not candidate.is_file():
        raise FileNotFoundError(
            f"no bundled scenario named {name!r}; available: {', '.join(list_bundled())}")
    try:
        data = json.loads(candidate.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:  # pragma: no cover - ship-time integrity
        raise ParseError(f"invalid JSON in bundled scenario {name!r}: {exc}") from exc
    return parse_bundle(data, origin=name)


def disturbance_to_dict(d: Disturbance) -> dict:
    """Plain-dict form of a disturbance, with a type tag."""
    if isinstance(d, StepDisturbance):
        return {"type": "step", "t0_s": d.t0_s, "dp0_mw": d.dp0_mw}
    if isinstance(d, RampDisturbance):
        return {"type": "ramp", "t0_s": d.t0_s, "k_mw_per_s": d.k_mw_per_s,
                "duration_s": d.duration_s}
    if isinstance(d, ShortTermDisturbance):
        return {"type": "short_term", "t0_s": d.t0_s, "dp0_mw": d.dp0_mw,
                "fault_duration_s": d.fault_duration_s,
                "recovery_mw_per_s": d.recovery_mw_per_s}
    raise SchemaError(f"unknown disturbance object: {d!r}")


def bundle_to_dict(b: ScenarioBundle) -> dict:
    """Round-trippable plain-dict form of a bundle (parse_bundle inverse)."""
    th = b.thresholds
    sc = b.scenario
    return {
        "name": b.name,
        "description": b.description,
        "calibration_notes": b.calibration_notes,
        "system": dataclasses.asdict(sc.params),
        "thresholds": {"k1": th.k1, "t_dist": th.t_dist, "dp_sh": th.dp_sh,
                       "df_sh": th.df_sh, "f_d": th.f_d,
                       "df_ss_lim": th.df_ss_lim, "df_max_lim": th.df_max_lim},
        "disturbance": disturbance_to_dict(sc.disturbance),
        "simulation": {"horizon_s": sc.horizon_s, "dt_s": sc.dt_s,
                       "deadband_hz": sc.deadband_hz},
    }
