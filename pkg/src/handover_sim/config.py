"""Scenario configuration: YAML schema, validation, and shipped scenarios.

Each scenario is one self-contained YAML file.  Validation is strict:
unknown keys are errors, not warnings, and every cross-field requirement
(direction-specific waypoints, joint counts, custom gains) is checked at
load time so a run never fails halfway through on bad input.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import agent, model, spatial
from .errors import ConfigError
from .fsm import ReleaseTrigger
from .impedance import GainSet, preset_gains


class RunDirection(Enum):
    ROBOT_TO_HUMAN = "robot-to-human"
    HUMAN_TO_ROBOT = "human-to-robot"
    COLLABORATIVE = "collaborative"
    IMPEDANCE_VALIDATION = "impedance-validation"


_HANDOVER_DIRECTIONS = (
    RunDirection.ROBOT_TO_HUMAN,
    RunDirection.HUMAN_TO_ROBOT,
    RunDirection.COLLABORATIVE,
)

_DEFAULT_THRESHOLDS = {"alpha_mps": 0.02, "beta_m": 0.005, "window_steps": 10, "max_retries": 3}
_DEFAULT_GRIPPER = {"max_aperture_m": 0.05, "rate_mps": 0.1,
                    "capture_radius_m": 0.02, "object_width_m": 0.02}


@dataclass(frozen=True)
class GripperSettings:
    max_aperture: float
    rate: float
    capture_radius: float
    object_width: float


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully parsed scenario, ready for the run loop."""

    name: str
    direction: RunDirection
    behavior: str
    gains: GainSet
    dt: float
    duration: float
    locked_joints: bool
    params: model.LinkParameters
    initial_xi: np.ndarray
    trigger: ReleaseTrigger
    beta: float
    max_retries: int
    gripper: GripperSettings
    hand_script: agent.HandScript
    handover_pose: np.ndarray = None
    object_pose: np.ndarray = None
    retract_pose: np.ndarray = None
    desired_offset: np.ndarray = None
    output_path: str = None

    def with_overrides(self, behavior: str = None, dt: float = None,
                       duration: float = None) -> "ScenarioConfig":
        cfg = self
        if behavior is not None and behavior != cfg.behavior:
            if behavior not in ("rigid", "compliant"):
                raise ConfigError(f"behavior override must be a preset, got {behavior!r}")
            cfg = replace(cfg, behavior=behavior, gains=preset_gains(behavior))
        if dt is not None:
            if not 0.0 < dt <= 0.01:
                raise ConfigError("dt override must be in (0, 0.01]")
            cfg = replace(cfg, dt=float(dt))
        if duration is not None:
            if duration <= 0.0:
                raise ConfigError("duration override must be positive")
            cfg = replace(cfg, duration=float(duration))
        return cfg


def _check_keys(mapping: dict, allowed, where: str) -> None:
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _get(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key '{key}'")
    return mapping[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _vector(value, n: int, where: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ConfigError(f"{where}: expected a list of {n} numbers")
    return np.array([_number(v, where) for v in value])


def _matrix3(value, where: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{where}: expected a 3x3 matrix as nested lists")
    return np.stack([_vector(row, 3, where) for row in value])


def _parse_model(raw: dict) -> model.LinkParameters:
    where = "model"
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping")
    _check_keys(raw, {"base_mass_kg", "base_inertia_kgm2", "base_com_m", "links",
                      "ee_offset_xyz_m", "ee_offset_rpy_rad"}, where)
    links_raw = _get(raw, "links", where)
    if not isinstance(links_raw, list) or not links_raw:
        raise ConfigError(f"{where}.links: expected a non-empty list")
    links = []
    for i, entry in enumerate(links_raw):
        lw = f"{where}.links[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{lw}: expected a mapping")
        _check_keys(entry, {"mass_kg", "inertia_kgm2", "joint_axis",
                            "joint_origin_xyz_m", "joint_origin_rpy_rad", "com_offset_m"}, lw)
        try:
            links.append(model.LinkSpec(
                mass=_number(_get(entry, "mass_kg", lw), lw),
                inertia=_matrix3(_get(entry, "inertia_kgm2", lw), lw),
                joint_axis=_vector(_get(entry, "joint_axis", lw), 3, lw),
                joint_origin=spatial.HomogeneousTransform.from_rpy(
                    _vector(_get(entry, "joint_origin_xyz_m", lw), 3, lw),
                    _vector(entry.get("joint_origin_rpy_rad", [0, 0, 0]), 3, lw)),
                com_offset=_vector(_get(entry, "com_offset_m", lw), 3, lw),
            ))
        except ValueError as exc:
            raise ConfigError(f"{lw}: {exc}") from exc
    try:
        return model.LinkParameters(
            base_mass=_number(_get(raw, "base_mass_kg", where), where),
            base_inertia=_matrix3(_get(raw, "base_inertia_kgm2", where), where),
            base_com=_vector(raw.get("base_com_m", [0, 0, 0]), 3, where),
            links=tuple(links),
            ee_offset=spatial.HomogeneousTransform.from_rpy(
                _vector(_get(raw, "ee_offset_xyz_m", where), 3, where),
                _vector(raw.get("ee_offset_rpy_rad", [0, 0, 0]), 3, where)),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_profile(raw: dict, where: str) -> agent.ForceProfile:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping")
    _check_keys(raw, {"interpolation", "transmit", "segments"}, where)
    segs_raw = _get(raw, "segments", where)
    if not isinstance(segs_raw, list) or not segs_raw:
        raise ConfigError(f"{where}.segments: expected a non-empty list")
    segments = []
    for i, seg in enumerate(segs_raw):
        sw = f"{where}.segments[{i}]"
        if not isinstance(seg, dict):
            raise ConfigError(f"{sw}: expected a mapping")
        _check_keys(seg, {"t_start_s", "t_end_s", "wrench"}, sw)
        try:
            segments.append(agent.WrenchSegment(
                t_start=_number(_get(seg, "t_start_s", sw), sw),
                t_end=_number(_get(seg, "t_end_s", sw), sw),
                wrench=_vector(_get(seg, "wrench", sw), 6, sw),
            ))
        except ValueError as exc:
            raise ConfigError(f"{sw}: {exc}") from exc
    try:
        return agent.ForceProfile(
            segments=tuple(segments),
            interpolation=raw.get("interpolation", agent.INTERP_STEP),
            transmit=raw.get("transmit", agent.TRANSMIT_DIRECT),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_hand_script(raw: dict) -> agent.HandScript:
    where = "hand_script"
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping")
    _check_keys(raw, {"start_pose", "actions"}, where)
    actions = []
    for i, entry in enumerate(raw.get("actions", []) or []):
        aw = f"{where}.actions[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{aw}: expected a mapping")
        _check_keys(entry, {"t_s", "kind", "pose", "palm_relative", "profile"}, aw)
        kind = _get(entry, "kind", aw)
        pose = entry.get("pose")
        profile = entry.get("profile")
        try:
            actions.append(agent.HandAction(
                t=_number(_get(entry, "t_s", aw), aw),
                kind=kind,
                pose=None if pose is None else _vector(pose, 6, aw),
                palm_relative=bool(entry.get("palm_relative", False)),
                profile=None if profile is None else _parse_profile(profile, f"{aw}.profile"),
            ))
        except ValueError as exc:
            raise ConfigError(f"{aw}: {exc}") from exc
    try:
        return agent.HandScript(
            start_pose=_vector(_get(raw, "start_pose", where), 6, where),
            actions=tuple(actions),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


_TOP_KEYS = {
    "name", "direction", "behavior", "dt_s", "duration_s", "locked_joints",
    "output_path", "model", "gains", "thresholds", "gripper",
    "initial_base_pose", "initial_joint_angles_rad", "handover_pose",
    "waypoints", "desired_offset", "hand_script",
}


def parse_scenario(raw: dict, fallback_name: str = "scenario") -> ScenarioConfig:
    """Validate a loaded YAML mapping and build the ScenarioConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("scenario file must contain a mapping at the top level")
    _check_keys(raw, _TOP_KEYS, "scenario")

    name = raw.get("name", fallback_name)
    if not isinstance(name, str) or not name:
        raise ConfigError("name: expected a non-empty string")

    direction_raw = _get(raw, "direction", "scenario")
    try:
        direction = RunDirection(direction_raw)
    except ValueError:
        raise ConfigError(
            f"direction: expected one of {[d.value for d in RunDirection]}, got {direction_raw!r}"
        ) from None

    behavior = raw.get("behavior", "rigid")
    if behavior not in ("rigid", "compliant", "custom"):
        raise ConfigError(f"behavior: expected rigid|compliant|custom, got {behavior!r}")

    gains_raw = raw.get("gains")
    if behavior == "custom":
        if gains_raw is None:
            raise ConfigError("behavior 'custom' requires a gains section")
    if gains_raw is not None:
        gw = "gains"
        if not isinstance(gains_raw, dict):
            raise ConfigError(f"{gw}: expected a mapping")
        _check_keys(gains_raw, {"stiffness_diag", "damping_diag"}, gw)
        try:
            gains = GainSet(
                np.diag(_vector(_get(gains_raw, "stiffness_diag", gw), 6, gw)),
                np.diag(_vector(_get(gains_raw, "damping_diag", gw), 6, gw)),
                label=behavior,
            )
        except ValueError as exc:
            raise ConfigError(f"{gw}: {exc}") from exc
    else:
        gains = preset_gains(behavior)

    dt = _number(_get(raw, "dt_s", "scenario"), "dt_s")
    if not 0.0 < dt <= 0.01:
        raise ConfigError("dt_s: must be in (0, 0.01]")
    duration = _number(_get(raw, "duration_s", "scenario"), "duration_s")
    if duration <= 0.0:
        raise ConfigError("duration_s: must be positive")

    locked = raw.get("locked_joints", True)
    if not isinstance(locked, bool):
        raise ConfigError("locked_joints: expected a boolean")

    output_path = raw.get("output_path")
    if output_path is not None and not isinstance(output_path, str):
        raise ConfigError("output_path: expected a string")

    params = _parse_model(_get(raw, "model", "scenario"))

    thresholds = dict(_DEFAULT_THRESHOLDS)
    if "thresholds" in raw:
        tw = "thresholds"
        if not isinstance(raw[tw], dict):
            raise ConfigError(f"{tw}: expected a mapping")
        _check_keys(raw[tw], set(_DEFAULT_THRESHOLDS), tw)
        thresholds.update(raw[tw])
    try:
        trigger = ReleaseTrigger(alpha=_number(thresholds["alpha_mps"], "thresholds.alpha_mps"),
                                 window=int(thresholds["window_steps"]))
    except ValueError as exc:
        raise ConfigError(f"thresholds: {exc}") from exc
    beta = _number(thresholds["beta_m"], "thresholds.beta_m")
    if beta <= 0.0:
        raise ConfigError("thresholds.beta_m: must be positive")
    max_retries = int(thresholds["max_retries"])
    if max_retries < 1:
        raise ConfigError("thresholds.max_retries: must be at least 1")

    grip = dict(_DEFAULT_GRIPPER)
    if "gripper" in raw:
        gw = "gripper"
        if not isinstance(raw[gw], dict):
            raise ConfigError(f"{gw}: expected a mapping")
        _check_keys(raw[gw], set(_DEFAULT_GRIPPER), gw)
        grip.update(raw[gw])
    gripper = GripperSettings(
        max_aperture=_number(grip["max_aperture_m"], "gripper.max_aperture_m"),
        rate=_number(grip["rate_mps"], "gripper.rate_mps"),
        capture_radius=_number(grip["capture_radius_m"], "gripper.capture_radius_m"),
        object_width=_number(grip["object_width_m"], "gripper.object_width_m"),
    )
    if gripper.max_aperture <= 0 or gripper.rate <= 0:
        raise ConfigError("gripper: aperture bound and rate must be positive")
    if not 0.0 < gripper.object_width <= gripper.max_aperture:
        raise ConfigError("gripper.object_width_m: must be in (0, max_aperture_m]")
    if beta > gripper.max_aperture:
        raise ConfigError("thresholds.beta_m: cannot exceed gripper.max_aperture_m")

    base_pose = _vector(raw.get("initial_base_pose", [0, 0, 0, 0, 0, 0]), 6, "initial_base_pose")
    joints = raw.get("initial_joint_angles_rad", [0.0] * params.n_joints)
    joints = _vector(joints, params.n_joints, "initial_joint_angles_rad")
    initial_xi = np.concatenate([base_pose, joints])

    handover_pose = raw.get("handover_pose")
    if handover_pose is not None:
        handover_pose = _vector(handover_pose, 6, "handover_pose")
    object_pose = retract_pose = None
    if "waypoints" in raw:
        ww = "waypoints"
        if not isinstance(raw[ww], dict):
            raise ConfigError(f"{ww}: expected a mapping")
        _check_keys(raw[ww], {"object_pose", "retract_pose"}, ww)
        if "object_pose" in raw[ww]:
            object_pose = _vector(raw[ww]["object_pose"], 6, f"{ww}.object_pose")
        if "retract_pose" in raw[ww]:
            retract_pose = _vector(raw[ww]["retract_pose"], 6, f"{ww}.retract_pose")

    desired_offset = raw.get("desired_offset")
    if desired_offset is not None:
        desired_offset = _vector(desired_offset, 6, "desired_offset")

    if direction in _HANDOVER_DIRECTIONS:
        if handover_pose is None:
            raise ConfigError(f"direction {direction.value}: handover_pose is required")
        if retract_pose is None:
            raise ConfigError(f"direction {direction.value}: waypoints.retract_pose is required")
    if direction in (RunDirection.ROBOT_TO_HUMAN, RunDirection.COLLABORATIVE):
        if object_pose is None:
            raise ConfigError(f"direction {direction.value}: waypoints.object_pose is required")

    hand_script = _parse_hand_script(raw.get("hand_script", {"start_pose": [0, 0, 0, 0, 0, 0]}))

    return ScenarioConfig(
        name=name,
        direction=direction,
        behavior=behavior,
        gains=gains,
        dt=dt,
        duration=duration,
        locked_joints=locked,
        params=params,
        initial_xi=initial_xi,
        trigger=trigger,
        beta=beta,
        max_retries=max_retries,
        gripper=gripper,
        hand_script=hand_script,
        handover_pose=handover_pose,
        object_pose=object_pose,
        retract_pose=retract_pose,
        desired_offset=desired_offset,
        output_path=output_path,
    )


def shipped_scenario_names() -> list:
    """Names of the scenario files bundled with the package."""
    root = resources.files("handover_sim").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_scenario(ref: str) -> ScenarioConfig:
    """Load a scenario from a file path or a shipped scenario name."""
    path = Path(ref)
    if path.is_file():
        text = path.read_text()
        fallback = path.stem
    else:
        candidate = resources.files("handover_sim").joinpath(f"scenarios/{ref}.yaml")
        if not candidate.is_file():
            raise ConfigError(f"no such scenario file or shipped scenario: {ref!r}")
        text = candidate.read_text()
        fallback = ref
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {ref}: {exc}") from exc
    return parse_scenario(raw, fallback_name=fallback)
