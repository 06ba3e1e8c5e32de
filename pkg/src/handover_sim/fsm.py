"""Finite state machine driving both handover directions.

Robot-to-human: Idle -> OpenGripper -> MoveToObject -> GraspObject ->
MoveToHandover -> ActivateIC -> SignalUser -> AwaitTrigger -> ReleaseObject
-> DeactivateIC -> Retract -> Done.  Release fires only when the
end-effector speed stays at or above alpha for a full detection window
while the object is attached.

Human-to-robot: Idle -> OpenGripper -> MoveToHandover -> ActivateIC ->
SignalUser -> AwaitTrigger -> CloseGripper -> VerifyGrasp, then either
DeactivateIC -> Retract -> Done when the resulting aperture is at least
beta, or SignalFailure -> OpenGripper -> SignalUser -> AwaitTrigger with
the attempt counter incremented.  Placement detection reuses the same
velocity-window rule: pressing the object into the compliant gripper moves
the end effector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .errors import IllegalTransitionError


class FsmNode(Enum):
    IDLE = "Idle"
    OPEN_GRIPPER = "OpenGripper"
    MOVE_TO_OBJECT = "MoveToObject"
    GRASP_OBJECT = "GraspObject"
    MOVE_TO_HANDOVER = "MoveToHandoverPose"
    ACTIVATE_IC = "ActivateIC"
    SIGNAL_USER = "SignalUser"
    AWAIT_TRIGGER = "AwaitTrigger"
    RELEASE_OBJECT = "ReleaseObject"
    CLOSE_GRIPPER = "CloseGripper"
    VERIFY_GRASP = "VerifyGrasp"
    SIGNAL_FAILURE = "SignalFailure"
    DEACTIVATE_IC = "DeactivateIC"
    RETRACT = "Retract"
    DONE = "Done"


class Direction(Enum):
    ROBOT_TO_HUMAN = "robot-to-human"
    HUMAN_TO_ROBOT = "human-to-robot"


class HandoverPhase(Enum):
    APPROACH = "Approach"
    TRANSFER = "Transfer"
    RETRACTION = "Retraction"


_PHASES = {
    FsmNode.IDLE: HandoverPhase.APPROACH,
    FsmNode.OPEN_GRIPPER: HandoverPhase.APPROACH,
    FsmNode.MOVE_TO_OBJECT: HandoverPhase.APPROACH,
    FsmNode.GRASP_OBJECT: HandoverPhase.APPROACH,
    FsmNode.MOVE_TO_HANDOVER: HandoverPhase.APPROACH,
    FsmNode.ACTIVATE_IC: HandoverPhase.APPROACH,
    FsmNode.SIGNAL_USER: HandoverPhase.TRANSFER,
    FsmNode.AWAIT_TRIGGER: HandoverPhase.TRANSFER,
    FsmNode.RELEASE_OBJECT: HandoverPhase.TRANSFER,
    FsmNode.CLOSE_GRIPPER: HandoverPhase.TRANSFER,
    FsmNode.VERIFY_GRASP: HandoverPhase.TRANSFER,
    FsmNode.SIGNAL_FAILURE: HandoverPhase.TRANSFER,
    FsmNode.DEACTIVATE_IC: HandoverPhase.RETRACTION,
    FsmNode.RETRACT: HandoverPhase.RETRACTION,
    FsmNode.DONE: HandoverPhase.RETRACTION,
}

# Commands the machine emits toward the harness.
CMD_OPEN_GRIPPER = "open_gripper"
CMD_CLOSE_GRIPPER = "close_gripper"
CMD_GOTO_OBJECT = "goto_object"
CMD_GOTO_HANDOVER = "goto_handover"
CMD_GOTO_RETRACT = "goto_retract"
CMD_IC_ON = "ic_on"
CMD_IC_OFF = "ic_off"
CMD_SIGNAL_READY = "signal_ready"
CMD_SIGNAL_FAILURE = "signal_failure"
CMD_RELEASE_OBJECT = "release_object"
CMD_ABORT = "abort"


def phase_of(node: FsmNode) -> HandoverPhase:
    return _PHASES[node]


@dataclass(frozen=True)
class ReleaseTrigger:
    """Velocity threshold alpha plus the debounce window, in steps."""

    alpha: float
    window: int

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError("alpha threshold must be positive")
        if self.window < 1:
            raise ValueError("window must be at least one step")


@dataclass(frozen=True)
class GripperState:
    """Aperture snapshot the FSM observes."""

    aperture: float
    object_attached: bool
    beta_threshold: float
    commanded: str  # 'open' | 'close'


@dataclass(frozen=True)
class Observation:
    """Per-step world snapshot consumed by step_fsm."""

    ee_velocity_norm: float
    gripper: GripperState
    robot_at_waypoint: bool
    ic_active: bool
    gripper_settled: bool


@dataclass(frozen=True)
class FsmState:
    node: FsmNode
    direction: Direction
    attempt_count: int = 0
    trigger_streak: int = 0


def initial_state(direction: Direction) -> FsmState:
    return FsmState(node=FsmNode.IDLE, direction=direction)


def detect_placement(recent_speeds, trigger: ReleaseTrigger) -> bool:
    """True when the speed held at or above alpha for the whole window."""
    speeds = list(recent_speeds)
    if len(speeds) < trigger.window:
        return False
    return all(s >= trigger.alpha for s in speeds[-trigger.window:])


def signal_user(kind: str) -> str:
    """Event token for the simulated flashlight signal."""
    if kind not in ("ready", "failure"):
        raise ValueError(f"unknown signal kind {kind!r}")
    return f"signal_{kind}"


def step_fsm(state: FsmState, obs: Observation, trigger: ReleaseTrigger,
             max_retries: int = 3):
    """Advance the machine one step.

    Returns (new_state, commands).  Commands are emitted on the transition
    that needs them; an empty list means hold.  Raises
    IllegalTransitionError on observations no outgoing edge accepts, which
    signals a harness bug rather than a domain event.
    """
    node = state.node
    d = state.direction
    g = obs.gripper
    cmds: list[str] = []

    if node is FsmNode.DONE:
        return state, cmds

    if node is FsmNode.IDLE:
        return replace(state, node=FsmNode.OPEN_GRIPPER), [CMD_OPEN_GRIPPER]

    if node is FsmNode.OPEN_GRIPPER:
        if g.commanded != "open":
            raise IllegalTransitionError("OpenGripper without an open command")
        if obs.gripper_settled:
            if obs.ic_active:
                # Retry path after a failed human-to-robot transfer.
                return replace(state, node=FsmNode.SIGNAL_USER), [CMD_SIGNAL_READY]
            if d is Direction.ROBOT_TO_HUMAN:
                return replace(state, node=FsmNode.MOVE_TO_OBJECT), [CMD_GOTO_OBJECT]
            return replace(state, node=FsmNode.MOVE_TO_HANDOVER), [CMD_GOTO_HANDOVER]
        return state, cmds

    if node is FsmNode.MOVE_TO_OBJECT:
        if d is not Direction.ROBOT_TO_HUMAN:
            raise IllegalTransitionError("MoveToObject outside robot-to-human")
        if obs.robot_at_waypoint:
            return replace(state, node=FsmNode.GRASP_OBJECT), [CMD_CLOSE_GRIPPER]
        return state, cmds

    if node is FsmNode.GRASP_OBJECT:
        if obs.gripper_settled:
            return replace(state, node=FsmNode.MOVE_TO_HANDOVER), [CMD_GOTO_HANDOVER]
        return state, cmds

    if node is FsmNode.MOVE_TO_HANDOVER:
        if obs.robot_at_waypoint:
            return replace(state, node=FsmNode.ACTIVATE_IC), [CMD_IC_ON]
        return state, cmds

    if node is FsmNode.ACTIVATE_IC:
        if not obs.ic_active:
            raise IllegalTransitionError("impedance control failed to activate")
        return replace(state, node=FsmNode.SIGNAL_USER), [CMD_SIGNAL_READY]

    if node is FsmNode.SIGNAL_USER:
        return replace(state, node=FsmNode.AWAIT_TRIGGER,
                       attempt_count=state.attempt_count + 1,
                       trigger_streak=0), cmds

    if node is FsmNode.AWAIT_TRIGGER:
        if not obs.ic_active:
            raise IllegalTransitionError("AwaitTrigger with impedance control inactive")
        streak = state.trigger_streak + 1 if obs.ee_velocity_norm >= trigger.alpha else 0
        fired = streak >= trigger.window
        if d is Direction.ROBOT_TO_HUMAN:
            if fired and g.object_attached:
                return replace(state, node=FsmNode.RELEASE_OBJECT, trigger_streak=0), \
                    [CMD_RELEASE_OBJECT, CMD_OPEN_GRIPPER]
        else:
            if fired:
                return replace(state, node=FsmNode.CLOSE_GRIPPER, trigger_streak=0), \
                    [CMD_CLOSE_GRIPPER]
        return replace(state, trigger_streak=streak), cmds

    if node is FsmNode.RELEASE_OBJECT:
        if d is not Direction.ROBOT_TO_HUMAN:
            raise IllegalTransitionError("ReleaseObject outside robot-to-human")
        if obs.gripper_settled:
            return replace(state, node=FsmNode.DEACTIVATE_IC), [CMD_IC_OFF]
        return state, cmds

    if node is FsmNode.CLOSE_GRIPPER:
        if obs.gripper_settled:
            return replace(state, node=FsmNode.VERIFY_GRASP), cmds
        return state, cmds

    if node is FsmNode.VERIFY_GRASP:
        if d is not Direction.HUMAN_TO_ROBOT:
            raise IllegalTransitionError("VerifyGrasp outside human-to-robot")
        if g.aperture >= g.beta_threshold:
            return replace(state, node=FsmNode.DEACTIVATE_IC), [CMD_IC_OFF]
        cmds = [CMD_SIGNAL_FAILURE]
        if state.attempt_count >= max_retries:
            cmds.append(CMD_ABORT)
        return replace(state, node=FsmNode.SIGNAL_FAILURE), cmds

    if node is FsmNode.SIGNAL_FAILURE:
        return replace(state, node=FsmNode.OPEN_GRIPPER), [CMD_OPEN_GRIPPER]

    if node is FsmNode.DEACTIVATE_IC:
        if obs.ic_active:
            raise IllegalTransitionError("impedance control failed to deactivate")
        return replace(state, node=FsmNode.RETRACT), [CMD_GOTO_RETRACT]

    if node is FsmNode.RETRACT:
        if obs.robot_at_waypoint:
            return replace(state, node=FsmNode.DONE), cmds
        return state, cmds

    raise IllegalTransitionError(f"no transition defined for node {node}")


@dataclass
class GripperModel:
    """First-order aperture model, rate limited, with an object stop.

    Closing stops at the object width while an object sits within the
    capture radius of the palm; otherwise the jaws close to zero.  There is
    no grasp mechanics beyond this, just enough to exercise the beta check.
    """

    max_aperture: float = 0.05
    rate: float = 0.1
    capture_radius: float = 0.02
    object_width: float = 0.02
    aperture: float = 0.0
    commanded: str = "close"

    def command(self, which: str) -> None:
        if which not in ("open", "close"):
            raise ValueError(f"unknown gripper command {which!r}")
        self.commanded = which

    def target(self, object_near: bool) -> float:
        if self.commanded == "open":
            return self.max_aperture
        return self.object_width if object_near else 0.0

    def update(self, dt: float, object_near: bool) -> bool:
        """Advance one step; returns True when the aperture reached its target."""
        target = self.target(object_near)
        delta = target - self.aperture
        limit = self.rate * dt
        if self.commanded == "close" and delta > 0.0:
            # Jaws never reopen on their own; a widening target just stops them.
            delta = 0.0
        self.aperture += max(-limit, min(limit, delta))
        settled = abs(self.aperture - target) < 1e-12
        if self.commanded == "close" and self.aperture <= target + 1e-12:
            settled = True
        return settled
