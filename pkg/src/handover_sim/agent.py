"""Deterministic scripted stand-in for the human hand.

The agent is a pure function of time and the current world snapshot: it
produces the hand pose, the external wrench to inject at the end effector,
and object possession actions.  Wrenches come in two transmission modes:
'direct' contact forces always apply during their time segments, while
'through-grasp' forces (a pull on a held object) apply only while the robot
is actually holding the object, so they cease on release by themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TRANSMIT_DIRECT = "direct"
TRANSMIT_THROUGH_GRASP = "through-grasp"

INTERP_STEP = "step"
INTERP_RAMP = "linear-ramp"


@dataclass(frozen=True)
class WrenchSegment:
    t_start: float
    t_end: float
    wrench: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "wrench", np.asarray(self.wrench, dtype=float).reshape(6))
        if not self.t_end > self.t_start:
            raise ValueError("segment must have t_end > t_start")
        if not np.all(np.isfinite(self.wrench)):
            raise ValueError("segment wrench must be finite")


@dataclass(frozen=True)
class ForceProfile:
    """Piecewise wrench profile; zero outside all segments.

    'step' holds the segment wrench; 'linear-ramp' rises linearly from zero
    at t_start to the segment wrench at t_end (follow with a step segment
    for a plateau).
    """

    segments: tuple
    interpolation: str = INTERP_STEP
    transmit: str = TRANSMIT_DIRECT

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if self.interpolation not in (INTERP_STEP, INTERP_RAMP):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        if self.transmit not in (TRANSMIT_DIRECT, TRANSMIT_THROUGH_GRASP):
            raise ValueError(f"unknown transmit mode {self.transmit!r}")
        for prev, cur in zip(segs, segs[1:]):
            if cur.t_start < prev.t_end:
                raise ValueError("segments must be time ordered and non-overlapping")


def wrench_at(profile: ForceProfile, t: float) -> np.ndarray:
    """Evaluate the profile at time t (seconds, t >= 0)."""
    if t < 0.0:
        raise ValueError("time must be non-negative")
    for seg in profile.segments:
        if seg.t_start <= t < seg.t_end:
            if profile.interpolation == INTERP_STEP:
                return seg.wrench.copy()
            frac = (t - seg.t_start) / (seg.t_end - seg.t_start)
            return frac * seg.wrench
    return np.zeros(6)


ACTION_MOVE_TO = "move-to"
ACTION_APPLY = "apply"
ACTION_PLACE_OBJECT = "place-object"
ACTION_TAKE_OBJECT = "take-object"
ACTION_RETRACT = "retract"


@dataclass(frozen=True)
class HandAction:
    t: float
    kind: str
    pose: np.ndarray = None
    palm_relative: bool = False
    profile: ForceProfile = None

    def __post_init__(self):
        if self.kind not in (ACTION_MOVE_TO, ACTION_APPLY, ACTION_PLACE_OBJECT,
                             ACTION_TAKE_OBJECT, ACTION_RETRACT):
            raise ValueError(f"unknown hand action {self.kind!r}")
        if self.pose is not None:
            object.__setattr__(self, "pose", np.asarray(self.pose, dtype=float).reshape(6))
        if self.kind in (ACTION_MOVE_TO, ACTION_RETRACT) and self.pose is None:
            raise ValueError(f"{self.kind} requires a pose")
        if self.kind == ACTION_APPLY and self.profile is None:
            raise ValueError("apply requires a force profile")


@dataclass(frozen=True)
class HandScript:
    """Time-ordered hand actions plus the initial hand pose."""

    start_pose: np.ndarray
    actions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "start_pose", np.asarray(self.start_pose, dtype=float).reshape(6))
        acts = tuple(self.actions)
        object.__setattr__(self, "actions", acts)
        for prev, cur in zip(acts, acts[1:]):
            if cur.t < prev.t:
                raise ValueError("hand actions must be time ordered")

    def profiles(self):
        return tuple(a.profile for a in self.actions if a.kind == ACTION_APPLY)


@dataclass(frozen=True)
class HandSample:
    """Agent output for one step."""

    hand_pose: np.ndarray
    wrench_direct: np.ndarray
    wrench_through_grasp: np.ndarray
    possession_events: tuple  # of 'place-object' / 'take-object'


def run_hand_script(script: HandScript, t: float, world, prev_t: float = None) -> HandSample:
    """Evaluate the script at time t.

    `world` must expose `ee_pose` (the 6-vector end-effector pose) for
    palm-relative hand placement.  Possession events fire for actions with
    prev_t < action.t <= t; pass the previous sample time to get each event
    exactly once.  A script past its last action simply holds position with
    zero wrench.
    """
    pose = script.start_pose.copy()
    for action in script.actions:
        if action.t > t:
            break
        if action.kind in (ACTION_MOVE_TO, ACTION_RETRACT):
            if action.palm_relative:
                pose = np.asarray(world.ee_pose, dtype=float) + action.pose
            else:
                pose = action.pose.copy()
    direct = np.zeros(6)
    through = np.zeros(6)
    for action in script.actions:
        if action.kind != ACTION_APPLY:
            continue
        w = wrench_at(action.profile, t)
        if action.profile.transmit == TRANSMIT_DIRECT:
            direct += w
        else:
            through += w
    events = tuple(
        a.kind for a in script.actions
        if a.kind in (ACTION_PLACE_OBJECT, ACTION_TAKE_OBJECT)
        and (prev_t is None or a.t > prev_t) and a.t <= t
    )
    return HandSample(pose, direct, through, events)
